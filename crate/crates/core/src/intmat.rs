//! Integer linear algebra: Hermite normal form with transform, integer
//! kernels, and an exact LLL pass on Gram matrices used to precondition
//! enumeration.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::ratmat::{frac, lcm_of_denominators, Matrix, Rational, SymMatrix};

pub type IntRow = Vec<BigInt>;

/// Row-style Hermite normal form.
///
/// Returns `(h, u, rank)` with `u · a = h`, `u` unimodular, the first `rank`
/// rows of `h` in echelon form with positive pivots and entries above each
/// pivot reduced into `[0, pivot)`, and the remaining rows zero.
pub fn hnf_with_transform(a: &[IntRow]) -> (Vec<IntRow>, Vec<IntRow>, usize) {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut h: Vec<IntRow> = a.to_vec();
    let mut u: Vec<IntRow> =
        (0..m).map(|i| (0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for r in row..m {
                if !h[r][col].is_zero() && best.is_none_or(|b| h[r][col].abs() < h[b][col].abs()) {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            h.swap(row, b);
            u.swap(row, b);
            let mut done = true;
            for r in row + 1..m {
                if h[r][col].is_zero() {
                    continue;
                }
                let q = h[r][col].div_floor(&h[row][col]);
                sub_row(&mut h, r, row, &q);
                sub_row(&mut u, r, row, &q);
                if !h[r][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[row][col].is_zero() {
            continue;
        }
        if h[row][col].is_negative() {
            for x in h[row].iter_mut().chain(u[row].iter_mut()) {
                *x = -std::mem::take(x);
            }
        }
        for r in 0..row {
            let q = h[r][col].div_floor(&h[row][col]);
            if !q.is_zero() {
                sub_row(&mut h, r, row, &q);
                sub_row(&mut u, r, row, &q);
            }
        }
        row += 1;
    }
    (h, u, row)
}

fn sub_row(m: &mut [IntRow], target: usize, src: usize, q: &BigInt) {
    let (t, s) = if target < src {
        let (lo, hi) = m.split_at_mut(src);
        (&mut lo[target], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(target);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in t.iter_mut().zip(s.iter()) {
        *x -= q * y;
    }
}

/// Basis of the integer left kernel `{x ∈ Zᵐ : x·a = 0}`.
pub fn left_kernel(a: &[IntRow]) -> Vec<IntRow> {
    let (_, u, rank) = hnf_with_transform(a);
    u.into_iter().skip(rank).collect()
}

/// Scales a rational matrix to an integer one by the lcm of its denominators.
pub fn clear_denominators(m: &Matrix) -> (Vec<IntRow>, BigInt) {
    let l = lcm_of_denominators(m.entries());
    let lq = Rational::from_integer(l.clone());
    let rows = m.row_iter().map(|r| r.iter().map(|q| (q * &lq).to_integer()).collect()).collect();
    (rows, l)
}

/// Basis (HNF rows) of the Z-span of the rows of a rational matrix.
pub fn span_basis(m: &Matrix) -> Matrix {
    let (ints, l) = clear_denominators(m);
    let (h, _, rank) = hnf_with_transform(&ints);
    let lq = Rational::from_integer(l);
    let rows: Vec<Vec<Rational>> =
        h.into_iter().take(rank).map(|r| r.into_iter().map(|x| Rational::from_integer(x) / &lq).collect()).collect();
    if rows.is_empty() {
        return Matrix::zeros(0, m.cols());
    }
    Matrix::from_rows(rows).expect("rows have equal length")
}

pub fn round_rational(q: &Rational) -> BigInt {
    (q + frac(1, 2)).floor().to_integer()
}

/// Exact LLL reduction (δ = 3/4) driven only by the Gram matrix.
///
/// Returns a unimodular integer matrix `t` whose rows are the coordinates of
/// the reduced basis; the reduced Gram is `t G tᵀ`.
pub fn lll_transform(gram: &SymMatrix) -> Vec<IntRow> {
    let n = gram.dim();
    let mut t: Vec<IntRow> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    if n <= 1 {
        return t;
    }
    let delta = frac(3, 4);
    let mut g = gram.to_rows();
    let (mut mu, mut bnorm) = gram_schmidt(&g);
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let q = round_rational(&mu[k][j]);
            if q.is_zero() {
                continue;
            }
            let qr = Rational::from_integer(q.clone());
            // b_k -= q b_j
            for c in 0..n {
                let v = &t[j][c] * &q;
                t[k][c] -= v;
            }
            update_gram_sub(&mut g, k, j, &qr);
            for l in 0..j {
                let v = &qr * &mu[j][l];
                mu[k][l] -= v;
            }
            mu[k][j] -= &qr;
        }
        let lhs = &bnorm[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &bnorm[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            t.swap(k, k - 1);
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            let gs = gram_schmidt(&g);
            mu = gs.0;
            bnorm = gs.1;
            k = (k - 1).max(1);
        }
    }
    t
}

fn update_gram_sub(g: &mut [Vec<Rational>], k: usize, j: usize, q: &Rational) {
    // new b_k = b_k - q b_j
    let n = g.len();
    let gkk = &g[k][k] - Rational::from_integer(BigInt::from(2)) * q * &g[k][j] + q * q * &g[j][j];
    for c in 0..n {
        if c == k {
            continue;
        }
        let v = &g[k][c] - q * &g[j][c];
        g[k][c] = v.clone();
        g[c][k] = v;
    }
    g[k][k] = gkk;
}

fn gram_schmidt(g: &[Vec<Rational>]) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let n = g.len();
    let mut mu = vec![vec![Rational::zero(); n]; n];
    let mut b = vec![Rational::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut v = g[i][j].clone();
            for l in 0..j {
                v -= &mu[j][l] * &mu[i][l] * &b[l];
            }
            mu[i][j] = v / &b[j];
        }
        let mut v = g[i][i].clone();
        for l in 0..i {
            v -= &mu[i][l] * &mu[i][l] * &b[l];
        }
        b[i] = v;
        mu[i][i] = Rational::one();
    }
    (mu, b)
}

pub fn int_matrix(rows: &[IntRow]) -> Matrix {
    if rows.is_empty() {
        return Matrix::zeros(0, 0);
    }
    Matrix::from_int_rows(rows).expect("rows have equal length")
}
