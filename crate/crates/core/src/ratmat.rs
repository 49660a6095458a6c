//! Exact rational scalars and dense matrices.
//!
//! Everything in this crate is computed over [`Rational`], an arbitrary
//! precision fraction kept in lowest terms. Determinants use fraction-free
//! (Bareiss) elimination on a row-scaled integer copy; semidefiniteness is
//! decided by recursive Schur complements so singular inputs are handled
//! exactly.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{LatticeError, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

/// Parses `"p/q"`, `"p"` or a plain decimal integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || LatticeError::ParseRational(s.to_string());
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => t.parse::<BigInt>().map(Rational::from_integer).map_err(|_| bad()),
    }
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn format_row(row: &[Rational]) -> String {
    let parts: Vec<String> = row.iter().map(format_rational).collect();
    format!("({})", parts.join(","))
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn lcm_of_denominators<'a>(it: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    it.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Serde adapters writing rationals as strings.
pub mod serde_rational {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Lit {
        Str(String),
        Int(i64),
    }

    fn lit_to_rational<E: serde::de::Error>(l: Lit) -> std::result::Result<Rational, E> {
        match l {
            Lit::Str(s) => parse_rational(&s).map_err(E::custom),
            Lit::Int(i) => Ok(rat(i)),
        }
    }

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        lit_to_rational(Lit::deserialize(d)?)
    }

    pub mod row {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(r: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(r.len()))?;
            for q in r {
                seq.serialize_element(&format_rational(q))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
            Vec::<Lit>::deserialize(d)?.into_iter().map(lit_to_rational).collect()
        }
    }

    pub mod rows {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(rows: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(rows.len()))?;
            for r in rows {
                let strs: Vec<String> = r.iter().map(format_rational).collect();
                seq.serialize_element(&strs)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
            let raw = Vec::<Vec<Lit>>::deserialize(d)?;
            let mut out = Vec::with_capacity(raw.len());
            for r in raw {
                out.push(r.into_iter().map(lit_to_rational).collect::<std::result::Result<Vec<_>, _>>()?);
            }
            if out.iter().any(|r| r.len() != out[0].len()) {
                return Err(D::Error::custom("ragged matrix"));
            }
            Ok(out)
        }
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LatticeError::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect())
    }

    pub fn from_int_rows(rows: &[Vec<BigInt>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Rational]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.row_iter().map(<[Rational]>::to_vec).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(LatticeError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.rows {
            return Err(LatticeError::DimensionMismatch("vector length".into()));
        }
        let mut out = vec![Rational::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (o, m) in out.iter_mut().zip(self.row(i)) {
                *o += vi * m;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(is_integer)
    }

    /// Row echelon form by exact Gaussian elimination; returns the rank.
    pub fn rank(&self) -> usize {
        let mut a = self.to_rows();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&r| !a[r][col].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            let pivot = a[rank][col].clone();
            for r in rank + 1..self.rows {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] / &pivot;
                for c in col..self.cols {
                    let sub = &f * &a[rank][c];
                    a[r][c] -= sub;
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn determinant(&self) -> Result<Rational> {
        if self.rows != self.cols {
            return Err(LatticeError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let mut scale = BigInt::one();
        let mut ints = Vec::with_capacity(self.rows);
        for row in self.row_iter() {
            let l = lcm_of_denominators(row);
            ints.push(row.iter().map(|q| (q * Rational::from_integer(l.clone())).to_integer()).collect());
            scale *= l;
        }
        Ok(Rational::new(bareiss_determinant(ints), scale))
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.to_rows();
        let mut inv = Matrix::identity(n).to_rows();
        for col in 0..n {
            let p = (col..n).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, p);
            inv.swap(col, p);
            let pivot = a[col][col].clone();
            for c in 0..n {
                a[col][c] /= &pivot;
                inv[col][c] /= &pivot;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in 0..n {
                    let s1 = &f * &a[col][c];
                    a[r][c] -= s1;
                    let s2 = &f * &inv[col][c];
                    inv[r][c] -= s2;
                }
            }
        }
        Matrix::from_rows(inv).ok()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.row_iter().map(format_row).collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// Fraction-free determinant of an integer matrix.
pub fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Symmetric rational matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(LatticeError::NotSquare { rows: m.rows, cols: m.cols });
        }
        for i in 0..m.rows {
            for j in i + 1..m.rows {
                if m[(i, j)] != m[(j, i)] {
                    return Err(LatticeError::NotSymmetric);
                }
            }
        }
        Ok(SymMatrix(m))
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(Matrix::from_i64_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let mut m = Matrix::zeros(entries.len(), entries.len());
        for (i, d) in entries.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        SymMatrix(m)
    }

    /// Gram matrix `B Bᵀ` of the rows of `b`.
    pub fn gram_of_rows(b: &Matrix) -> Self {
        let n = b.rows();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = dot(b.row(i), b.row(j));
                m[(j, i)] = v.clone();
                m[(i, j)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.0.to_rows()
    }

    pub fn is_integral(&self) -> bool {
        self.0.is_integral()
    }

    pub fn determinant(&self) -> Rational {
        determinant(self)
    }

    pub fn inverse(&self) -> Option<SymMatrix> {
        self.0.inverse().map(SymMatrix)
    }

    /// `U M Uᵀ` for a change of basis whose rows are the new basis coordinates.
    pub fn transform(&self, u: &Matrix) -> Result<SymMatrix> {
        let m = u.mul(&self.0)?.mul(&u.transpose())?;
        SymMatrix::new(m)
    }

    /// Bilinear form `x M yᵀ`.
    pub fn bilinear(&self, x: &[Rational], y: &[Rational]) -> Rational {
        let n = self.dim();
        let mut acc = Rational::zero();
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            let mut row = Rational::zero();
            for j in 0..n {
                if !y[j].is_zero() {
                    row += &self.0[(i, j)] * &y[j];
                }
            }
            acc += &x[i] * row;
        }
        acc
    }

    /// Pivots `d_i = Δ_i / Δ_{i-1}` of symmetric elimination without pivoting;
    /// `None` if some leading principal minor vanishes.
    pub fn leading_pivots(&self) -> Option<Vec<Rational>> {
        let n = self.dim();
        let mut a = self.to_rows();
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let p = a[k][k].clone();
            if p.is_zero() {
                return None;
            }
            for i in k + 1..n {
                if a[i][k].is_zero() {
                    continue;
                }
                let f = &a[i][k] / &p;
                for j in k + 1..n {
                    let s = &f * &a[k][j];
                    a[i][j] -= s;
                }
            }
            piv.push(p);
        }
        Some(piv)
    }

    /// Direct sum (block diagonal).
    pub fn direct_sum(&self, other: &SymMatrix) -> SymMatrix {
        let (a, b) = (self.dim(), other.dim());
        let mut m = Matrix::zeros(a + b, a + b);
        for i in 0..a {
            for j in 0..a {
                m[(i, j)] = self.0[(i, j)].clone();
            }
        }
        for i in 0..b {
            for j in 0..b {
                m[(a + i, a + j)] = other.0[(i, j)].clone();
            }
        }
        SymMatrix(m)
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = Rational;
    fn index(&self, ij: (usize, usize)) -> &Rational {
        &self.0[ij]
    }
}

impl fmt::Display for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn determinant(m: &SymMatrix) -> Rational {
    m.0.determinant().expect("symmetric matrices are square")
}

/// Exact semidefiniteness test by recursive Schur complements.
///
/// A negative diagonal entry is a witness of indefiniteness. A zero diagonal
/// entry forces its row and column to vanish (otherwise a 2x2 minor is
/// negative); the row and column are then dropped.
pub fn is_positive_semidefinite(m: &SymMatrix) -> bool {
    let mut a = m.to_rows();
    while !a.is_empty() {
        let d = a[0][0].clone();
        if d.is_negative() {
            return false;
        }
        let n = a.len();
        if d.is_zero() {
            if a[0].iter().any(|x| !x.is_zero()) {
                return false;
            }
            a = a.into_iter().skip(1).map(|r| r.into_iter().skip(1).collect()).collect();
            continue;
        }
        let mut next = Vec::with_capacity(n - 1);
        for i in 1..n {
            let f = &a[i][0] / &d;
            next.push((1..n).map(|j| &a[i][j] - &f * &a[0][j]).collect::<Vec<_>>());
        }
        a = next;
    }
    true
}

/// All leading principal minors strictly positive.
pub fn is_positive_definite(m: &SymMatrix) -> bool {
    match m.leading_pivots() {
        Some(p) => p.iter().all(Signed::is_positive),
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(rows: &[Vec<i64>]) -> SymMatrix {
        SymMatrix::from_i64_rows(rows).unwrap()
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(determinant(&SymMatrix::identity(3)), rat(1));
        assert_eq!(determinant(&sym(&[vec![3, 2, 2], vec![2, 3, 2], vec![2, 2, 3]])), rat(7));
        assert_eq!(determinant(&sym(&[vec![3, 2, 0], vec![2, 3, 0], vec![0, 0, 3]])), rat(15));
    }

    #[test]
    fn determinant_with_zero_pivot_and_fractions() {
        let m = SymMatrix::from_rows(vec![vec![rat(0), frac(1, 2)], vec![frac(1, 2), rat(0)]]).unwrap();
        assert_eq!(determinant(&m), frac(-1, 4));
        assert_eq!(determinant(&sym(&[vec![1, 1], vec![1, 1]])), rat(0));
    }

    #[test]
    fn psd_examples() {
        assert!(is_positive_semidefinite(&sym(&[vec![0, 0], vec![0, 0]])));
        let m = SymMatrix::from_rows(vec![vec![frac(3, 5), frac(-7, 5)], vec![frac(-7, 5), frac(3, 5)]]).unwrap();
        assert!(!is_positive_semidefinite(&m));
        assert!(is_positive_semidefinite(&sym(&[vec![1, 1], vec![1, 1]])));
        assert!(!is_positive_semidefinite(&sym(&[vec![0, 1], vec![1, 0]])));
        assert!(!is_positive_semidefinite(&sym(&[vec![0, 0], vec![0, -1]])));
    }

    #[test]
    fn pd_examples() {
        assert!(is_positive_definite(&SymMatrix::identity(2)));
        assert!(is_positive_definite(&sym(&[vec![3, 2, 2], vec![2, 3, 2], vec![2, 2, 3]])));
        assert!(!is_positive_definite(&sym(&[vec![1, 2], vec![2, 1]])));
        assert!(!is_positive_definite(&sym(&[vec![1, 1], vec![1, 1]])));
    }

    #[test]
    fn rejects_asymmetric() {
        assert_eq!(SymMatrix::from_i64_rows(&[vec![1, 2], vec![3, 1]]), Err(LatticeError::NotSymmetric));
    }

    #[test]
    fn rational_text_format() {
        assert_eq!(format_rational(&frac(6, -4)), "-3/2");
        assert_eq!(format_rational(&rat(5)), "5");
        assert_eq!(parse_rational(" 10/4 ").unwrap(), frac(5, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let g = sym(&[vec![2, -1], vec![-1, 2]]);
        let inv = g.inverse().unwrap();
        assert_eq!(inv[(0, 0)], frac(2, 3));
        let prod = g.as_matrix().mul(inv.as_matrix()).unwrap();
        assert_eq!(prod, Matrix::identity(2));
    }
}
