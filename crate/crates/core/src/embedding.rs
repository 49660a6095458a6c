//! Embedding verdicts into unimodular lattices, and representative Gram
//! matrices of the local maximal lattices.
//!
//! Conditions are checked at `p | 2·det` only: elsewhere the lattice is
//! locally unimodular, so its Hasse symbol and `(det, det)_p` are both 1.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{LatticeError, Result};
use crate::lattice::Lattice;
use crate::local::{
    hasse_symbol, hilbert_symbol, is_prime, is_rational_square, legendre, local_invariant_of_diagonal, prime_divisors,
    qp_space_exists, relevant_places, smallest_nonresidue, square_class, LocalInvariant, Place, SquareClass,
};
use crate::ratmat::{rat, Rational, SymMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingRule {
    /// `m = n`: the space is `I_n` over Q.
    SameRank,
    /// `m = n + 1`.
    RankPlusOne,
    /// `m = n + 2`.
    RankPlusTwo,
    /// `m ≥ n + 3`: always possible.
    RankPlusThreeOrMore,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingVerdict {
    pub feasible: bool,
    pub rule: EmbeddingRule,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_place: Option<Place>,
    /// Set on odd-unimodular verdicts: which sufficient clause applied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub odd_clause: Option<String>,
}

fn integral_definite(g: &SymMatrix) -> Result<()> {
    if !g.is_integral() {
        return Err(LatticeError::NotIntegral);
    }
    Lattice::abstract_gram(g.clone()).map(|_| ())
}

fn finite_places(det: &Rational) -> impl Iterator<Item = Place> {
    relevant_places(det).into_iter().filter(|p| *p != Place::Infinity)
}

/// Whether a lattice with Gram `g` embeds in some unimodular lattice of rank `m`.
pub fn embed_unimodular_feasible(g: &SymMatrix, m: usize) -> Result<EmbeddingVerdict> {
    integral_definite(g)?;
    let n = g.dim();
    if m < n {
        return Err(LatticeError::RankBelowLattice { target: m, rank: n });
    }
    let det = g.determinant();
    let verdict = |rule, failing_place: Option<Place>| EmbeddingVerdict {
        feasible: failing_place.is_none(),
        rule,
        failing_place,
        odd_clause: None,
    };
    let first_failure = |pred: &dyn Fn(Place) -> Result<bool>| -> Result<Option<Place>> {
        for p in finite_places(&det) {
            if !pred(p)? {
                return Ok(Some(p));
            }
        }
        Ok(None)
    };
    match m - n {
        0 => {
            if !is_rational_square(&det) {
                // the determinant class is already nontrivial at some prime
                let bad = finite_places(&det)
                    .find(|&p| !square_class(&det, p).is_ok_and(|c| c.is_trivial()))
                    .or_else(|| first_nonsquare_prime(&det));
                return Ok(verdict(EmbeddingRule::SameRank, bad));
            }
            let f = first_failure(&|p| Ok(hasse_symbol(g, p)? == 1))?;
            Ok(verdict(EmbeddingRule::SameRank, f))
        }
        1 => {
            let f = first_failure(&|p| Ok(hasse_symbol(g, p)? * hilbert_symbol(&det, &det, p)? == 1))?;
            Ok(verdict(EmbeddingRule::RankPlusOne, f))
        }
        2 => {
            let f = first_failure(&|p| {
                let minus_one = square_class(&rat(-1), p)?;
                if square_class(&det, p)? != minus_one {
                    return Ok(true);
                }
                let want = if p == Place::Prime(2) { -1 } else { 1 };
                Ok(hasse_symbol(g, p)? == want)
            })?;
            Ok(verdict(EmbeddingRule::RankPlusTwo, f))
        }
        _ => Ok(verdict(EmbeddingRule::RankPlusThreeOrMore, None)),
    }
}

fn first_nonsquare_prime(det: &Rational) -> Option<Place> {
    let mut primes = prime_divisors(det.numer());
    primes.extend(prime_divisors(det.denom()));
    primes.sort_unstable();
    primes.into_iter().map(Place::Prime).find(|&p| !square_class(det, p).is_ok_and(|c| c.is_trivial()))
}

/// Sufficient condition for embedding in an odd unimodular lattice of rank
/// `m`. A negative answer means only that no clause applies.
pub fn embed_odd_unimodular_feasible(g: &SymMatrix, m: usize) -> Result<EmbeddingVerdict> {
    let mut v = embed_unimodular_feasible(g, m)?;
    if !v.feasible {
        return Ok(v);
    }
    let n = g.dim();
    let odd = (0..n).any(|i| g[(i, i)].to_integer().bit(0));
    let two = Place::Prime(2);
    let clause = if odd {
        Some("odd")
    } else if m == n + 2 {
        let det_class = square_class(&g.determinant(), two)?;
        let three = square_class(&rat(3), two)?;
        (!(det_class == three && hasse_symbol(g, two)? == 1)).then_some("rank-plus-two")
    } else if m >= n + 3 {
        Some("rank-plus-three")
    } else {
        None
    };
    v.feasible = clause.is_some();
    v.odd_clause = Some(clause.unwrap_or("not-implied").to_string());
    Ok(v)
}

/// Determinant test for embedding a rank-`n` lattice into a unimodular
/// lattice of rank `n + 2`.
///
/// Writes `det = p_1^{α_1}⋯p_t^{α_t}·d` with the `p_i` the odd primes of even
/// positive exponent (any other split breaks the first condition), then
/// requires `(-d / p_i) = -1` for each `p_i`, and `d/2^{ν_2(d)} ≢ -1 (mod 8)`
/// when `ν_2(d)` is even. The rank does not enter.
pub fn det_sufficient_condition(_n: usize, det: u64) -> bool {
    if det == 0 {
        return false;
    }
    let mut d = det;
    let mut square_primes = Vec::new();
    for p in prime_divisors(&BigInt::from(det)) {
        if p == 2 {
            continue;
        }
        let mut e = 0;
        let mut q = det;
        while q.is_multiple_of(p) {
            q /= p;
            e += 1;
        }
        if e % 2 == 0 {
            square_primes.push(p);
            d /= p.pow(e);
        }
    }
    let di = BigInt::from(d);
    if square_primes.iter().any(|&p| legendre(&-&di, p) != -1) {
        return false;
    }
    let v2 = d.trailing_zeros();
    !(v2.is_multiple_of(2) && (d >> v2) % 8 == 7)
}

/// Determinants in `1..=27` for which a rank-12 lattice is not forced into a
/// unimodular lattice of rank 14 by [`det_sufficient_condition`].
pub fn rank12_exception_determinants() -> Vec<u64> {
    (1..=27).filter(|&d| !det_sufficient_condition(12, d)).collect()
}

fn diag_gram(n: usize, tail: &[i64]) -> Result<SymMatrix> {
    if tail.len() > n {
        return Err(LatticeError::NoTableEntry(format!("rank {n} is below the table minimum {}", tail.len())));
    }
    let mut d = vec![rat(1); n - tail.len()];
    d.extend(tail.iter().map(|&x| rat(x)));
    Ok(SymMatrix::diagonal(&d))
}

/// Diagonal Gram of the maximal local lattice with the given invariants:
/// the odd-prime table (entries among `1, δ_p, p, pδ_p`) or, for `p = 2`,
/// the table of lattices with norm ideal `Z_2`.
pub fn maximal_rep_gram(p: u64, n: usize, det_class: &SquareClass, hasse: i32) -> Result<SymMatrix> {
    if !is_prime(p) {
        return Err(LatticeError::NotPrime(p));
    }
    let place = Place::Prime(p);
    if det_class.place != place || !(hasse == 1 || hasse == -1) || n == 0 {
        return Err(LatticeError::Invalid("malformed local invariant".into()));
    }
    let inv = LocalInvariant { place, dim: n, det_class: *det_class, hasse };
    if !qp_space_exists(&inv) {
        return Err(LatticeError::NoTableEntry(format!("no space with invariants ({n}, {det_class}, {hasse}) at {p}")));
    }
    let cls = |a: i64| square_class(&rat(a), place).expect("nonzero");
    if p == 2 {
        let key = [1, -1, 3, -3, 2, -2, 6, -6].into_iter().find(|&k| cls(k) == *det_class);
        let entry: Vec<i64> = match (hasse, key) {
            (1, Some(1)) => vec![],
            (1, Some(k)) => vec![k],
            (-1, Some(1)) => vec![-1, -1],
            (-1, Some(-1)) => vec![-1, -1, -1],
            (-1, Some(3)) => vec![3, 3, 3],
            (-1, Some(-3)) => vec![-1, 3],
            (-1, Some(2)) => vec![-3, -6],
            (-1, Some(-2)) => vec![-3, 6],
            (-1, Some(6)) => vec![-3, -2],
            (-1, Some(-6)) => vec![-3, 2],
            _ => return Err(LatticeError::NoTableEntry(format!("class {det_class} at 2"))),
        };
        if (n, *det_class, hasse) == (2, cls(3), -1) {
            return Err(LatticeError::NoTableEntry(
                "rank 2, class 3, Hasse -1 has no lattice with norm ideal Z_2".into(),
            ));
        }
        return diag_gram(n, &entry);
    }
    let delta = smallest_nonresidue(p) as i64;
    let pi = p as i64;
    let one_mod_four = p % 4 == 1;
    let tail: Vec<i64> = if hasse == 1 {
        [1, delta, pi, pi * delta]
            .into_iter()
            .find(|&k| cls(k) == *det_class)
            .map(|k| if k == 1 { vec![] } else { vec![k] })
            .expect("four classes cover Q_p*/squares")
    } else if *det_class == cls(pi * delta) {
        vec![delta, pi]
    } else if *det_class == cls(pi) {
        vec![delta, pi * delta]
    } else if *det_class == cls(-delta) {
        if one_mod_four {
            vec![pi, pi * delta]
        } else {
            vec![pi, pi]
        }
    } else {
        // the remaining class is that of -1
        if one_mod_four {
            vec![delta, pi, pi * delta]
        } else {
            vec![delta, pi, pi]
        }
    };
    diag_gram(n, &tail)
}

/// Invariants of a diagonal Gram at `p`, for checking table entries.
pub fn diagonal_invariant(g: &SymMatrix, p: u64) -> Result<LocalInvariant> {
    let d: Vec<Rational> = (0..g.dim()).map(|i| g[(i, i)].clone()).collect();
    local_invariant_of_diagonal(&d, Place::Prime(p))
}

/// `ν_2` of a nonzero rational, as used by the table checks.
pub fn two_adic_valuation(q: &Rational) -> i64 {
    let v = |x: &BigInt| x.abs().trailing_zeros().map_or(0, |t| t.to_i64().unwrap_or(0));
    v(q.numer()) - v(q.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(k: i64) -> SymMatrix {
        SymMatrix::from_i64_rows(&[vec![k]]).unwrap()
    }

    #[test]
    fn seven_needs_four_squares() {
        let v = embed_unimodular_feasible(&g1(7), 3).unwrap();
        assert!(!v.feasible);
        assert_eq!(v.failing_place, Some(Place::Prime(2)));
        assert_eq!(v.rule, EmbeddingRule::RankPlusTwo);
        let v = embed_unimodular_feasible(&g1(7), 4).unwrap();
        assert!(v.feasible);
        assert_eq!(v.rule, EmbeddingRule::RankPlusThreeOrMore);
        assert!(embed_unimodular_feasible(&g1(7), 0).is_err());
    }

    #[test]
    fn identity_embeds_at_same_rank() {
        let v = embed_unimodular_feasible(&SymMatrix::identity(4), 4).unwrap();
        assert!(v.feasible);
        assert_eq!(v.rule, EmbeddingRule::SameRank);
        assert!(!embed_unimodular_feasible(&g1(3), 1).unwrap().feasible);
    }

    #[test]
    fn odd_embedding_clauses() {
        let v = embed_odd_unimodular_feasible(&g1(2), 1).unwrap();
        assert!(!v.feasible);
        let a2 = SymMatrix::from_i64_rows(&[vec![2, -1], vec![-1, 2]]).unwrap();
        assert!(embed_odd_unimodular_feasible(&a2, 5).unwrap().feasible);
        assert!(embed_odd_unimodular_feasible(&g1(5), 2).unwrap().feasible);
        assert!(!embed_odd_unimodular_feasible(&g1(3), 2).unwrap().feasible);
    }

    #[test]
    fn determinant_condition() {
        assert!(det_sufficient_condition(12, 6));
        assert!(!det_sufficient_condition(12, 7));
        assert!(!det_sufficient_condition(12, 25));
        assert!(det_sufficient_condition(12, 9));
        assert_eq!(rank12_exception_determinants(), vec![7, 15, 18, 23, 25]);
    }

    #[test]
    fn table_examples() {
        let p3 = Place::Prime(3);
        let trivial = square_class(&rat(1), p3).unwrap();
        assert_eq!(maximal_rep_gram(3, 4, &trivial, 1).unwrap(), SymMatrix::identity(4));
        let c3 = square_class(&rat(3), Place::Prime(2)).unwrap();
        let g = maximal_rep_gram(2, 5, &c3, -1).unwrap();
        let diag: Vec<Rational> = (0..5).map(|i| g[(i, i)].clone()).collect();
        assert_eq!(diag, vec![rat(1), rat(1), rat(3), rat(3), rat(3)]);
        assert!(maximal_rep_gram(2, 2, &c3, -1).is_err());
        let minus_one = square_class(&rat(-1), p3).unwrap();
        assert!(maximal_rep_gram(3, 2, &minus_one, -1).is_err());
    }
}
