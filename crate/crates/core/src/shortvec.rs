//! Exact bounded-norm vector enumeration.
//!
//! The Gram matrix is first LLL-reduced (exactly), then the reduced form is
//! written as a sum of squares `Σ q_i (y_i + Σ_{j>i} q_ij y_j)²` and searched
//! depth first from the last coordinate. All bookkeeping is rational; the
//! coordinate range at each level is found by walking outward from the
//! rounded center, which is the nearest integer to it.

use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{LatticeError, Result};
use crate::intmat::{int_matrix, lll_transform, round_rational};
use crate::lattice::Lattice;
use crate::par;
use crate::ratmat::{rat, serde_rational, Rational, SymMatrix};

pub const MAX_ENUMERATION_RANK: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShortVector {
    /// Integer coordinates in the lattice basis.
    pub coords: Vec<i64>,
    #[serde(with = "serde_rational")]
    pub norm: Rational,
    /// Ambient coordinates, when the lattice carries them.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_row")]
    pub vector: Option<Vec<Rational>>,
}

fn ser_opt_row<S: serde::Serializer>(v: &Option<Vec<Rational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => serde_rational::row::serialize(r, s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShortVectorSet {
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub vectors: Vec<ShortVector>,
}

impl ShortVectorSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn with_norm<'a>(&'a self, norm: &'a Rational) -> impl Iterator<Item = &'a ShortVector> + 'a {
        self.vectors.iter().filter(move |v| &v.norm == norm)
    }
}

/// Every nonzero lattice vector of norm at most `bound`, sorted
/// lexicographically by basis coordinates.
pub fn vectors_up_to(lattice: &Lattice, bound: &Rational) -> Result<ShortVectorSet> {
    if !bound.is_positive() {
        return Err(LatticeError::NonPositiveBound);
    }
    let n = lattice.rank();
    if n > MAX_ENUMERATION_RANK {
        return Err(LatticeError::RankTooLarge { rank: n, max: MAX_ENUMERATION_RANK });
    }
    let mut coords = enumerate_gram(lattice.gram(), bound);
    coords.sort();
    let vectors = coords
        .into_iter()
        .map(|(x, norm)| {
            let vector = lattice.basis().map(|_| lattice.vector_from_coords_i64(&x));
            ShortVector { coords: x, norm, vector }
        })
        .collect();
    Ok(ShortVectorSet { bound: bound.clone(), vectors })
}

/// Least nonzero norm.
pub fn minimum(lattice: &Lattice) -> Result<Rational> {
    if lattice.rank() == 0 {
        return Err(LatticeError::Invalid("rank-zero lattice has no minimum".into()));
    }
    let bound = reduced_diagonal_min(lattice.gram());
    let set = vectors_up_to(lattice, &bound)?;
    Ok(set.vectors.iter().map(|v| v.norm.clone()).min().expect("bound is attained"))
}

/// Number of vectors of minimal norm.
pub fn kissing_number(lattice: &Lattice) -> Result<usize> {
    let m = minimum(lattice)?;
    let set = vectors_up_to(lattice, &m)?;
    Ok(set.vectors.iter().filter(|v| v.norm == m).count())
}

fn reduced_diagonal_min(gram: &SymMatrix) -> Rational {
    let t = lll_transform(gram);
    let red = gram.transform(&int_matrix(&t)).expect("square transform");
    (0..red.dim()).map(|i| red[(i, i)].clone()).min().expect("nonzero rank")
}

struct Decomposition {
    /// q[i][i] are the squared Gram-Schmidt norms, q[i][j] (j > i) the
    /// completion-of-squares coefficients.
    q: Vec<Vec<Rational>>,
}

impl Decomposition {
    fn new(g: &SymMatrix) -> Self {
        let n = g.dim();
        let mut q = g.to_rows();
        for i in 0..n {
            for j in i + 1..n {
                let v = &q[i][j] / &q[i][i];
                q[j][i] = q[i][j].clone();
                q[i][j] = v;
            }
            for k in i + 1..n {
                for l in k..n {
                    let v = &q[k][i] * &q[i][l];
                    q[k][l] -= v;
                }
            }
        }
        Decomposition { q }
    }

    fn center(&self, i: usize, y: &[i64]) -> Rational {
        let n = y.len();
        let mut c = Rational::zero();
        for j in i + 1..n {
            if y[j] != 0 {
                c -= &self.q[i][j] * rat(y[j]);
            }
        }
        c
    }

    /// Integers `v` with `q_ii (v - c)² ≤ remaining`.
    fn range(&self, i: usize, c: &Rational, remaining: &Rational) -> Option<(i64, i64)> {
        let qi = &self.q[i][i];
        let fits = |v: i64| {
            let d = rat(v) - c;
            qi * &d * &d <= *remaining
        };
        let mid = round_rational(c).to_i64().expect("coordinate fits in i64");
        if !fits(mid) {
            return None;
        }
        let (mut lo, mut hi) = (mid, mid);
        while fits(lo - 1) {
            lo -= 1;
        }
        while fits(hi + 1) {
            hi += 1;
        }
        Some((lo, hi))
    }

    fn search(
        &self,
        level: usize,
        y: &mut Vec<i64>,
        remaining: &Rational,
        out: &mut Vec<(Vec<i64>, Rational)>,
        bound: &Rational,
    ) {
        let c = self.center(level, y);
        let Some((lo, hi)) = self.range(level, &c, remaining) else { return };
        for v in lo..=hi {
            y[level] = v;
            let d = rat(v) - &c;
            let rem = remaining - &self.q[level][level] * &d * &d;
            if level == 0 {
                if y.iter().any(|&x| x != 0) {
                    out.push((y.clone(), bound - &rem));
                }
            } else {
                self.search(level - 1, y, &rem, out, bound);
            }
        }
        y[level] = 0;
    }
}

/// Enumerates `x` with `0 < x G xᵀ ≤ bound`, returning coordinates in the
/// basis of `gram` together with the norm.
pub(crate) fn enumerate_gram(gram: &SymMatrix, bound: &Rational) -> Vec<(Vec<i64>, Rational)> {
    let n = gram.dim();
    if n == 0 {
        return Vec::new();
    }
    let t = lll_transform(gram);
    let tm = int_matrix(&t);
    let reduced = gram.transform(&tm).expect("square transform");
    let dec = Decomposition::new(&reduced);

    let top = n - 1;
    let c = Rational::zero();
    let Some((lo, hi)) = dec.range(top, &c, bound) else { return Vec::new() };
    let values: Vec<i64> = (lo..=hi).collect();
    let chunks: Vec<Vec<(Vec<i64>, Rational)>> = par::map(&values, |&v| {
        let mut y = vec![0i64; n];
        y[top] = v;
        let rem = bound - &dec.q[top][top] * rat(v) * rat(v);
        let mut out = Vec::new();
        if top == 0 {
            if v != 0 {
                out.push((y, bound - &rem));
            }
        } else {
            dec.search(top - 1, &mut y, &rem, &mut out, bound);
        }
        out
    });
    let t64: Vec<Vec<i64>> =
        t.iter().map(|r| r.iter().map(|x| x.to_i64().expect("small transform")).collect()).collect();
    chunks
        .into_iter()
        .flatten()
        .map(|(y, norm)| {
            let mut x = vec![0i64; n];
            for (k, yk) in y.iter().enumerate() {
                if *yk == 0 {
                    continue;
                }
                for (xi, tk) in x.iter_mut().zip(&t64[k]) {
                    *xi += yk * tk;
                }
            }
            (x, norm)
        })
        .collect()
}

/// Coordinate box `|x_i| ≤ sqrt(bound · (G⁻¹)_ii)`, as integers.
pub fn coefficient_box(gram: &SymMatrix, bound: &Rational) -> Vec<i64> {
    let inv = gram.inverse().expect("positive definite");
    (0..gram.dim())
        .map(|i| {
            let t = bound * &inv[(i, i)];
            let mut k: i64 = 0;
            while rat((k + 1) * (k + 1)) <= t {
                k += 1;
            }
            k
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    fn gram_lattice(rows: &[Vec<i64>]) -> Lattice {
        Lattice::from_gram(SymMatrix::from_i64_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn z2_unit_vectors() {
        let z2 = gram_lattice(&[vec![1, 0], vec![0, 1]]);
        let set = vectors_up_to(&z2, &rat(1)).unwrap();
        let coords: Vec<_> = set.vectors.iter().map(|v| v.coords.clone()).collect();
        assert_eq!(coords, vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]);
        assert_eq!(kissing_number(&z2).unwrap(), 4);
        assert_eq!(minimum(&z2).unwrap(), rat(1));
    }

    #[test]
    fn rejects_nonpositive_bound() {
        let z = gram_lattice(&[vec![1]]);
        assert_eq!(vectors_up_to(&z, &rat(0)), Err(LatticeError::NonPositiveBound));
    }

    #[test]
    fn a2_hexagonal_kissing() {
        let a2 = gram_lattice(&[vec![2, -1], vec![-1, 2]]);
        assert_eq!(kissing_number(&a2).unwrap(), 6);
        // norms 2, 6 and 8 each occur six times
        assert_eq!(vectors_up_to(&a2, &rat(8)).unwrap().len(), 18);
    }

    #[test]
    fn box_matches_simple_case() {
        let g = SymMatrix::from_i64_rows(&[vec![2, 1], vec![1, 2]]).unwrap();
        assert_eq!(coefficient_box(&g, &rat(6)), vec![2, 2]);
    }
}
