//! Local invariants of rational quadratic spaces.
//!
//! Square classes, Hilbert symbols and Hasse symbols at a prime `p` or at the
//! real place. The Hasse symbol follows the convention
//! `S_p(V) = Π_{i<j} (a_i, a_j)_p` for a diagonalization `⟨a_1, …, a_n⟩`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{LatticeError, Result};
use crate::ratmat::{rat, Rational, SymMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Prime(u64),
    Infinity,
}

impl Place {
    /// Checked constructor for a finite place.
    pub fn prime(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(Place::Prime(p))
        } else {
            Err(LatticeError::NotPrime(p))
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "infinity"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Place::Prime(p) => s.serialize_u64(*p),
            Place::Infinity => s.serialize_str("infinity"),
        }
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime divisors of a nonzero integer, ascending. Trial division.
pub fn prime_divisors(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d: u64 = 2;
    while !n.is_one() && !n.is_zero() {
        let bd = BigInt::from(d);
        if &bd * &bd > n {
            out.push(n.to_u64().expect("prime factor fits in u64"));
            break;
        }
        if n.is_multiple_of(&bd) {
            out.push(d);
            while n.is_multiple_of(&bd) {
                n /= &bd;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    out
}

/// Places relevant to a form of determinant `det`: `∞` and every `p | 2·det`.
pub fn relevant_places(det: &Rational) -> Vec<Place> {
    let mut primes = prime_divisors(&(det.numer() * det.denom() * BigInt::from(2)));
    primes.sort_unstable();
    let mut out = vec![Place::Infinity];
    out.extend(primes.into_iter().map(Place::Prime));
    out
}

/// Smallest positive quadratic nonresidue modulo an odd prime.
pub fn smallest_nonresidue(p: u64) -> u64 {
    (2..p).find(|&a| legendre_u64(a, p) == -1).expect("odd prime has a nonresidue")
}

fn legendre_u64(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let e = (p - 1) / 2;
    let mut result: u128 = 1;
    let mut base = a as u128;
    let m = p as u128;
    let mut k = e;
    while k > 0 {
        if k & 1 == 1 {
            result = result * base % m;
        }
        base = base * base % m;
        k >>= 1;
    }
    if result == 1 {
        1
    } else {
        -1
    }
}

/// Legendre symbol `(a / p)` for an odd prime `p`.
pub fn legendre(a: &BigInt, p: u64) -> i32 {
    let r = a.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits");
    legendre_u64(r, p)
}

fn split_int(n: &BigInt, p: u64) -> (i64, BigInt) {
    let bp = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while n.is_multiple_of(&bp) {
        n /= &bp;
        v += 1;
    }
    (v, n)
}

/// `(ν_p(a), u)` with `a = p^ν · u` and `u` a rational `p`-adic unit
/// represented by the integer `num(u)·den(u)` (same square class).
fn split(a: &Rational, p: u64) -> (i64, BigInt) {
    let (vn, un) = split_int(a.numer(), p);
    let (vd, ud) = split_int(a.denom(), p);
    (vn - vd, un * ud)
}

pub fn valuation(a: &Rational, p: u64) -> Result<i64> {
    if a.is_zero() {
        return Err(LatticeError::ZeroArgument);
    }
    if !is_prime(p) {
        return Err(LatticeError::NotPrime(p));
    }
    Ok(split(a, p).0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SquareClass {
    pub place: Place,
    /// Parity of the valuation; `None` at the real place.
    pub val_parity: Option<u8>,
    /// `1` or `δ_p` for odd `p`, the unit residue mod 8 for `p = 2`, the sign at `∞`.
    pub unit_class: i64,
}

impl SquareClass {
    pub fn is_trivial(&self) -> bool {
        self.val_parity.unwrap_or(0) == 0 && self.unit_class == 1
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.place, self.val_parity) {
            (Place::Infinity, _) => write!(f, "{}", if self.unit_class > 0 { "+" } else { "-" }),
            (Place::Prime(p), Some(1)) => write!(f, "{}·{p}", self.unit_class),
            _ => write!(f, "{}", self.unit_class),
        }
    }
}

pub fn square_class(a: &Rational, place: Place) -> Result<SquareClass> {
    match place {
        Place::Prime(p) if p > 2 => square_class_using(a, place, smallest_nonresidue(p)),
        _ => square_class_using(a, place, 0),
    }
}

/// Square class with an explicit choice of nonresidue representative at an
/// odd prime. Equality of classes does not depend on that choice.
pub fn square_class_using(a: &Rational, place: Place, nonresidue: u64) -> Result<SquareClass> {
    if a.is_zero() {
        return Err(LatticeError::ZeroArgument);
    }
    match place {
        Place::Infinity => {
            Ok(SquareClass { place, val_parity: None, unit_class: if a.is_positive() { 1 } else { -1 } })
        }
        Place::Prime(p) => {
            if !is_prime(p) {
                return Err(LatticeError::NotPrime(p));
            }
            let (v, u) = split(a, p);
            let unit_class = if p == 2 {
                u.mod_floor(&BigInt::from(8)).to_i64().expect("residue")
            } else if legendre(&u, p) == 1 {
                1
            } else {
                if legendre_u64(nonresidue, p) != -1 {
                    return Err(LatticeError::Invalid(format!("{nonresidue} is a square mod {p}")));
                }
                nonresidue as i64
            };
            Ok(SquareClass { place, val_parity: Some(v.rem_euclid(2) as u8), unit_class })
        }
    }
}

fn sign_bit(b: bool) -> i32 {
    if b {
        -1
    } else {
        1
    }
}

/// Hilbert symbol `(a, b)_place`.
pub fn hilbert_symbol(a: &Rational, b: &Rational, place: Place) -> Result<i32> {
    if a.is_zero() || b.is_zero() {
        return Err(LatticeError::ZeroArgument);
    }
    match place {
        Place::Infinity => Ok(sign_bit(a.is_negative() && b.is_negative())),
        Place::Prime(p) => {
            if !is_prime(p) {
                return Err(LatticeError::NotPrime(p));
            }
            let (alpha, u) = split(a, p);
            let (beta, v) = split(b, p);
            if p == 2 {
                let eps = |x: &BigInt| -> i64 {
                    let r = x.mod_floor(&BigInt::from(4)).to_i64().unwrap();
                    (r - 1) / 2 % 2
                };
                let omega = |x: &BigInt| -> i64 {
                    let r = x.mod_floor(&BigInt::from(8)).to_i64().unwrap();
                    ((r * r - 1) / 8) % 2
                };
                let e = eps(&u) * eps(&v) + alpha * omega(&v) + beta * omega(&u);
                Ok(sign_bit(e.rem_euclid(2) == 1))
            } else {
                let mut s = sign_bit((alpha * beta).rem_euclid(2) == 1 && p % 4 == 3);
                if beta.rem_euclid(2) == 1 {
                    s *= legendre(&u, p);
                }
                if alpha.rem_euclid(2) == 1 {
                    s *= legendre(&v, p);
                }
                Ok(s)
            }
        }
    }
}

/// Hasse symbol of the diagonal form `⟨d_1, …, d_n⟩`.
pub fn hasse_of_diagonal(d: &[Rational], place: Place) -> Result<i32> {
    let mut s = 1;
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            s *= hilbert_symbol(&d[i], &d[j], place)?;
        }
    }
    Ok(s)
}

/// Hasse symbol of a positive definite form, diagonalized by its leading
/// minor ratios.
pub fn hasse_symbol(g: &SymMatrix, place: Place) -> Result<i32> {
    let pivots = definite_pivots(g)?;
    hasse_of_diagonal(&pivots, place)
}

fn definite_pivots(g: &SymMatrix) -> Result<Vec<Rational>> {
    if g.dim() == 0 {
        return Ok(Vec::new());
    }
    match g.leading_pivots() {
        Some(p) if p.iter().all(Signed::is_positive) => Ok(p),
        _ => Err(LatticeError::NotPositiveDefinite),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LocalInvariant {
    pub place: Place,
    pub dim: usize,
    pub det_class: SquareClass,
    pub hasse: i32,
}

pub fn local_invariant(g: &SymMatrix, place: Place) -> Result<LocalInvariant> {
    let pivots = definite_pivots(g)?;
    local_invariant_of_diagonal(&pivots, place)
}

/// Invariant of an arbitrary nondegenerate diagonal form.
pub fn local_invariant_of_diagonal(d: &[Rational], place: Place) -> Result<LocalInvariant> {
    let det = d.iter().fold(rat(1), |acc, x| acc * x);
    Ok(LocalInvariant {
        place,
        dim: d.len(),
        det_class: square_class(&det, place)?,
        hasse: hasse_of_diagonal(d, place)?,
    })
}

pub fn spaces_locally_equal(g1: &SymMatrix, g2: &SymMatrix, place: Place) -> Result<bool> {
    Ok(local_invariant(g1, place)? == local_invariant(g2, place)?)
}

pub fn is_rational_square(q: &Rational) -> bool {
    if q.is_negative() {
        return false;
    }
    let (n, d) = (q.numer().sqrt(), q.denom().sqrt());
    &n * &n == *q.numer() && &d * &d == *q.denom()
}

/// Rational isometry of two positive definite forms.
///
/// Determinant classes agree everywhere exactly when the determinant ratio is
/// a rational square; after that, Hasse symbols can only differ at primes
/// dividing `2·det₁·det₂`.
pub fn spaces_globally_equal(g1: &SymMatrix, g2: &SymMatrix) -> Result<bool> {
    if g1.dim() != g2.dim() {
        return Ok(false);
    }
    let (d1, d2) = (g1.determinant(), g2.determinant());
    if !d1.is_positive() || !d2.is_positive() {
        return Err(LatticeError::NotPositiveDefinite);
    }
    if !is_rational_square(&(&d1 / &d2)) {
        return Ok(false);
    }
    for place in relevant_places(&(&d1 * &d2)) {
        if !spaces_locally_equal(g1, g2, place)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether a local space with these invariants exists.
pub fn qp_space_exists(inv: &LocalInvariant) -> bool {
    if inv.hasse == 1 {
        return true;
    }
    match inv.dim {
        0 | 1 => false,
        2 => square_class(&rat(-1), inv.place) != Ok(inv.det_class),
        _ => true,
    }
}
