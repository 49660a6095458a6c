//! Lattices with an optional explicit ambient basis.
//!
//! A [`Lattice`] always knows its Gram matrix. When it was built from
//! vectors it also keeps the basis rows in a standard Euclidean ambient
//! space, which is what projections, supports and sublattice tests need.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::intmat::{
    clear_denominators, hnf_with_transform, int_matrix, left_kernel, lll_transform, span_basis, IntRow,
};
use crate::ratmat::{dot, is_integer, is_positive_definite, rat, serde_rational, Matrix, Rational, SymMatrix};
use crate::shortvec;

pub const COSET_PROFILE_MAX_RANK: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone)]
pub struct Lattice {
    gram: SymMatrix,
    basis: Option<Matrix>,
    gram_inv: OnceLock<SymMatrix>,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.gram == other.gram && self.basis == other.basis
    }
}

impl Lattice {
    fn raw(gram: SymMatrix, basis: Option<Matrix>) -> Self {
        Lattice { gram, basis, gram_inv: OnceLock::new() }
    }

    /// Lattice spanned by linearly independent rows.
    pub fn from_basis(basis: Matrix) -> Result<Self> {
        let gram = SymMatrix::gram_of_rows(&basis);
        if basis.rows() > 0 && !is_positive_definite(&gram) {
            return Err(LatticeError::Invalid("basis rows are linearly dependent".into()));
        }
        Ok(Self::raw(gram, Some(basis)))
    }

    /// Z-span of arbitrary rational rows; the basis is the Hermite normal form.
    pub fn from_generators(generators: &Matrix) -> Result<Self> {
        Self::from_basis(span_basis(generators))
    }

    /// Integral positive definite Gram matrix. When every elimination pivot is
    /// a rational square the lattice is realized with explicit vectors (the
    /// rows of `L·√D` from `G = L D Lᵀ`); otherwise it stays Gram-only.
    pub fn from_gram(gram: SymMatrix) -> Result<Self> {
        if !gram.is_integral() {
            return Err(LatticeError::NotIntegral);
        }
        let mut lat = Self::abstract_gram(gram)?;
        lat.basis = rational_realization(&lat.gram);
        Ok(lat)
    }

    /// Gram-only lattice; the Gram may be rational.
    pub fn abstract_gram(gram: SymMatrix) -> Result<Self> {
        if gram.dim() > 0 && !is_positive_definite(&gram) {
            return Err(LatticeError::NotPositiveDefinite);
        }
        Ok(Self::raw(gram, None))
    }

    pub fn standard(n: usize) -> Self {
        Self::raw(SymMatrix::identity(n), Some(Matrix::identity(n)))
    }

    pub fn rank(&self) -> usize {
        self.gram.dim()
    }

    pub fn gram(&self) -> &SymMatrix {
        &self.gram
    }

    pub fn basis(&self) -> Option<&Matrix> {
        self.basis.as_ref()
    }

    pub fn ambient_dim(&self) -> Option<usize> {
        self.basis.as_ref().map(Matrix::cols)
    }

    pub fn determinant(&self) -> Rational {
        self.gram.determinant()
    }

    pub(crate) fn gram_inverse(&self) -> &SymMatrix {
        self.gram_inv.get_or_init(|| self.gram.inverse().expect("positive definite Gram"))
    }

    fn require_basis(&self) -> Result<&Matrix> {
        self.basis.as_ref().ok_or(LatticeError::NoCoordinates)
    }

    pub fn is_integral(&self) -> bool {
        self.gram.is_integral()
    }

    pub fn vector_from_coords(&self, x: &[Rational]) -> Vec<Rational> {
        let b = self.basis.as_ref().expect("lattice has coordinates");
        b.left_apply(x).expect("coordinate length")
    }

    pub fn vector_from_coords_i64(&self, x: &[i64]) -> Vec<Rational> {
        let q: Vec<Rational> = x.iter().map(|&v| rat(v)).collect();
        self.vector_from_coords(&q)
    }

    /// Rational coordinates of an ambient vector in the span of the basis.
    pub fn coordinates(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        let b = self.require_basis()?;
        if v.len() != b.cols() {
            return Err(LatticeError::DimensionMismatch("ambient dimension".into()));
        }
        let pairings: Vec<Rational> = b.row_iter().map(|r| dot(r, v)).collect();
        let x = self.gram_inverse().as_matrix().left_apply(&pairings)?;
        if b.left_apply(&x)? != v {
            return Err(LatticeError::NotInLattice);
        }
        Ok(x)
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.coordinates(v).is_ok_and(|x| x.iter().all(is_integer))
    }

    /// Integer coordinates of every basis vector of `sub` in this lattice.
    pub fn sublattice_coords(&self, sub: &Lattice) -> Result<Vec<IntRow>> {
        let sb = sub.require_basis()?;
        let mut out = Vec::with_capacity(sb.rows());
        for r in sb.row_iter() {
            let x = self.coordinates(r).map_err(|e| match e {
                LatticeError::NotInLattice => LatticeError::NotSublattice,
                other => other,
            })?;
            if !x.iter().all(is_integer) {
                return Err(LatticeError::NotSublattice);
            }
            out.push(x.into_iter().map(|q| q.to_integer()).collect());
        }
        Ok(out)
    }

    /// Sublattice spanned by the given integer coordinate rows (assumed
    /// independent).
    pub fn sublattice_from_coords(&self, coords: &[IntRow]) -> Result<Lattice> {
        let c = if coords.is_empty() { Matrix::zeros(0, self.rank()) } else { int_matrix(coords) };
        match &self.basis {
            Some(b) => Lattice::from_basis(c.mul(b)?),
            None => Ok(Self::raw(self.gram.transform(&c)?, None)),
        }
    }

    /// The same lattice with an LLL-reduced basis.
    pub fn reduced(&self) -> Lattice {
        if self.rank() <= 1 {
            return self.clone();
        }
        let t = lll_transform(&self.gram);
        self.sublattice_from_coords(&t).expect("unimodular change of basis")
    }

    /// Echelon basis of the scaled generator matrix; equal lattices in the
    /// same ambient space give equal canonical bases.
    pub fn canonical_basis(&self) -> Result<Matrix> {
        Ok(span_basis(self.require_basis()?))
    }

    pub fn same_lattice(&self, other: &Lattice) -> bool {
        match (self.canonical_basis(), other.canonical_basis()) {
            (Ok(a), Ok(b)) => a == b,
            _ => self.basis.is_none() && other.basis.is_none() && self.gram == other.gram,
        }
    }

    pub fn parity(&self) -> Result<Parity> {
        if !self.is_integral() {
            return Err(LatticeError::NotIntegral);
        }
        let two = BigInt::from(2);
        let even = (0..self.rank()).all(|i| self.gram[(i, i)].to_integer().is_multiple_of(&two));
        Ok(if even { Parity::Even } else { Parity::Odd })
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_integral() && self.determinant() == rat(1)
    }
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Rational::new(n, d))
}

fn rational_realization(gram: &SymMatrix) -> Option<Matrix> {
    let n = gram.dim();
    let mut a = gram.to_rows();
    let mut lower = Matrix::identity(n);
    let mut piv = Vec::with_capacity(n);
    for k in 0..n {
        let p = a[k][k].clone();
        for i in k + 1..n {
            let f = &a[i][k] / &p;
            lower[(i, k)] = f.clone();
            for j in k + 1..n {
                let s = &f * &a[k][j];
                a[i][j] -= s;
            }
        }
        piv.push(rational_sqrt(&p)?);
    }
    let mut b = Matrix::zeros(n, n);
    for i in 0..n {
        for k in 0..=i {
            b[(i, k)] = &lower[(i, k)] * &piv[k];
        }
    }
    Some(b)
}

/// Realizes an integral positive definite Gram matrix; see [`Lattice::from_gram`].
pub fn from_gram(gram: SymMatrix) -> Result<Lattice> {
    Lattice::from_gram(gram)
}

/// `L*`, with basis `G⁻¹ B` and Gram `G⁻¹`.
pub fn dual(l: &Lattice) -> Lattice {
    let inv = l.gram_inverse().clone();
    let basis = l.basis.as_ref().map(|b| inv.as_matrix().mul(b).expect("shapes agree"));
    Lattice::raw(inv, basis)
}

fn pairing_matrix(l: &Lattice, sub_coords: &[IntRow]) -> Matrix {
    // entry (i, j) = (b_i, m_j)
    let c = int_matrix(sub_coords);
    l.gram.as_matrix().mul(&c.transpose()).expect("shapes agree")
}

/// `{u ∈ L : (u, v) = 0 for all v ∈ M}`.
pub fn orthogonal_complement(l: &Lattice, m: &Lattice) -> Result<Lattice> {
    let coords = l.sublattice_coords(m)?;
    complement_of_coords(l, &coords)
}

/// Orthogonal complement of the sublattice with the given coordinates.
pub fn complement_of_coords(l: &Lattice, coords: &[IntRow]) -> Result<Lattice> {
    if coords.is_empty() {
        return Ok(l.clone());
    }
    let (ints, _) = clear_denominators(&pairing_matrix(l, coords));
    let kernel = left_kernel(&ints);
    Ok(l.sublattice_from_coords(&kernel)?.reduced())
}

/// Coordinates (in `L`) of a basis of `(M ⊗ Q) ∩ L`.
fn closure_coords(l: &Lattice, m_coords: &[IntRow]) -> Vec<IntRow> {
    let r = l.rank();
    let ct: Vec<IntRow> = (0..r).map(|i| m_coords.iter().map(|row| row[i].clone()).collect()).collect();
    // vectors y with C y = 0
    let right = left_kernel(&ct);
    if right.is_empty() {
        return (0..r).map(|i| (0..r).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    }
    let yt: Vec<IntRow> = (0..r).map(|i| right.iter().map(|row| row[i].clone()).collect()).collect();
    left_kernel(&yt)
}

/// Smallest primitive sublattice of `L` containing `M`.
pub fn primitive_closure(l: &Lattice, m: &Lattice) -> Result<Lattice> {
    let coords = l.sublattice_coords(m)?;
    Ok(l.sublattice_from_coords(&closure_coords(l, &coords))?.reduced())
}

pub fn is_primitive(l: &Lattice, m: &Lattice) -> Result<bool> {
    let p = primitive_closure(l, m)?;
    Ok(p.determinant() == m.determinant())
}

/// `[M : N]` for `N ⊆ M` of equal rank.
pub fn index(m: &Lattice, n: &Lattice) -> Result<BigInt> {
    if m.rank() != n.rank() {
        return Err(LatticeError::DimensionMismatch("index needs equal ranks".into()));
    }
    m.sublattice_coords(n)?;
    let ratio = n.determinant() / m.determinant();
    if !is_integer(&ratio) {
        return Err(LatticeError::NotSublattice);
    }
    let r = ratio.to_integer();
    let s = r.sqrt();
    if &s * &s != r {
        return Err(LatticeError::NotSublattice);
    }
    Ok(s)
}

pub fn parity(l: &Lattice) -> Result<Parity> {
    l.parity()
}

/// Orthogonal sum; ambient spaces are stacked when both summands have
/// coordinates.
pub fn direct_sum(a: &Lattice, b: &Lattice) -> Lattice {
    let gram = a.gram.direct_sum(&b.gram);
    let basis = match (&a.basis, &b.basis) {
        (Some(x), Some(y)) => {
            let (m1, m2) = (x.cols(), y.cols());
            let mut rows = Vec::new();
            for r in x.row_iter() {
                let mut v = r.to_vec();
                v.extend(std::iter::repeat_n(Rational::zero(), m2));
                rows.push(v);
            }
            for r in y.row_iter() {
                let mut v = vec![Rational::zero(); m1];
                v.extend_from_slice(r);
                rows.push(v);
            }
            Some(Matrix::from_rows(rows).expect("equal lengths"))
        }
        _ => None,
    };
    Lattice::raw(gram, basis)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CosetRepresentative {
    /// Coordinates in the basis of `M` (rational, since the vector is in `M*`).
    #[serde(with = "serde_rational::row")]
    pub representative: Vec<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ambient: Option<Vec<String>>,
    #[serde(with = "serde_rational")]
    pub minimal_norm: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CosetEntry {
    #[serde(with = "serde_rational::row")]
    pub representative: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub minimal_norm: Rational,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CosetProfile {
    pub coset_count: usize,
    /// Nonzero cosets grouped by minimal norm, ascending.
    pub entries: Vec<CosetEntry>,
    /// One minimal representative per nonzero coset.
    pub cosets: Vec<CosetRepresentative>,
}

impl CosetProfile {
    pub fn norm_census(&self) -> Vec<(Rational, usize)> {
        self.entries.iter().map(|e| (e.minimal_norm.clone(), e.multiplicity)).collect()
    }
}

/// Canonical representative of `c` modulo the row lattice of an HNF.
fn reduce_mod_hnf(c: &[BigInt], hnf: &[IntRow]) -> Vec<BigInt> {
    let mut v = c.to_vec();
    for row in hnf {
        let Some(p) = row.iter().position(|x| !x.is_zero()) else { continue };
        let q = v[p].div_floor(&row[p]);
        if !q.is_zero() {
            for (x, y) in v.iter_mut().zip(row) {
                *x -= &q * y;
            }
        }
    }
    v
}

/// Minimal norms of the nonzero cosets of `M` in `M*`.
pub fn coset_profile(m: &Lattice) -> Result<CosetProfile> {
    if m.rank() > COSET_PROFILE_MAX_RANK {
        return Err(LatticeError::RankTooLarge { rank: m.rank(), max: COSET_PROFILE_MAX_RANK });
    }
    if !m.is_integral() {
        return Err(LatticeError::NotIntegral);
    }
    let det = m.determinant().to_integer();
    let count = det.to_usize().ok_or_else(|| LatticeError::Invalid("determinant too large".into()))?;
    let gram_ints: Vec<IntRow> = m.gram.to_rows().iter().map(|r| r.iter().map(|q| q.to_integer()).collect()).collect();
    let (h, _, rank) = hnf_with_transform(&gram_ints);
    let hnf: Vec<IntRow> = h.into_iter().take(rank).collect();
    let d = dual(m);
    let inv = m.gram_inverse();

    let mut best: BTreeMap<Vec<BigInt>, (Vec<i64>, Rational)> = BTreeMap::new();
    let mut bound = rat(1);
    while best.len() + 1 < count {
        best.clear();
        for sv in shortvec::vectors_up_to(&d, &bound)?.vectors {
            let c: Vec<BigInt> = sv.coords.iter().map(|&x| BigInt::from(x)).collect();
            let key = reduce_mod_hnf(&c, &hnf);
            if key.iter().all(Zero::is_zero) {
                continue;
            }
            best.entry(key)
                .and_modify(|e| {
                    if sv.norm < e.1 {
                        *e = (sv.coords.clone(), sv.norm.clone());
                    }
                })
                .or_insert((sv.coords, sv.norm));
        }
        bound *= rat(2);
    }

    let mut cosets: Vec<CosetRepresentative> = best
        .into_values()
        .map(|(c, norm)| {
            let cq: Vec<Rational> = c.iter().map(|&x| rat(x)).collect();
            let representative = inv.as_matrix().left_apply(&cq).expect("shapes agree");
            let ambient = m.basis.as_ref().map(|b| {
                b.left_apply(&representative)
                    .expect("shapes agree")
                    .iter()
                    .map(crate::ratmat::format_rational)
                    .collect()
            });
            CosetRepresentative { representative, ambient, minimal_norm: norm }
        })
        .collect();
    cosets.sort_by(|a, b| a.minimal_norm.cmp(&b.minimal_norm).then(a.representative.cmp(&b.representative)));

    let mut entries: Vec<CosetEntry> = Vec::new();
    for c in &cosets {
        match entries.last_mut() {
            Some(e) if e.minimal_norm == c.minimal_norm => e.multiplicity += 1,
            _ => entries.push(CosetEntry {
                representative: c.representative.clone(),
                minimal_norm: c.minimal_norm.clone(),
                multiplicity: 1,
            }),
        }
    }
    Ok(CosetProfile { coset_count: count, entries, cosets })
}

/// JSON lattice document: explicit generators or a Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeDocument {
    Generators {
        ambient_dim: usize,
        #[serde(with = "serde_rational::rows")]
        generators: Vec<Vec<Rational>>,
    },
    Gram {
        #[serde(with = "serde_rational::rows")]
        gram: Vec<Vec<Rational>>,
    },
}

impl LatticeDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LatticeError::Invalid(format!("lattice document: {e}")))
    }

    pub fn to_lattice(&self) -> Result<Lattice> {
        match self {
            LatticeDocument::Generators { ambient_dim, generators } => {
                if generators.iter().any(|r| r.len() != *ambient_dim) {
                    return Err(LatticeError::DimensionMismatch("generator length differs from ambient_dim".into()));
                }
                if generators.is_empty() {
                    return Ok(Lattice::raw(SymMatrix::identity(0), Some(Matrix::zeros(0, *ambient_dim))));
                }
                Lattice::from_generators(&Matrix::from_rows(generators.clone())?)
            }
            LatticeDocument::Gram { gram } => Lattice::from_gram(SymMatrix::from_rows(gram.clone())?),
        }
    }

    pub fn from_lattice(l: &Lattice) -> Self {
        match &l.basis {
            Some(b) => LatticeDocument::Generators { ambient_dim: b.cols(), generators: b.to_rows() },
            None => LatticeDocument::Gram { gram: l.gram.to_rows() },
        }
    }
}
