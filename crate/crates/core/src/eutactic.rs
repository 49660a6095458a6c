//! Eutactic stars and s-integrability.
//!
//! `L` is s-integrable iff `L*` contains a eutactic star of scale `s`, iff the
//! system `Σ_k (w, u_k)² x_k = s (w, w)` has a non-negative integer solution,
//! where `u_k` runs over the dual vectors of norm at most `s` and `w` over the
//! test vectors `w_i + w_j` built from a basis. Dual vectors are taken in the
//! dual basis, so `(w_i, u_k)` is just the `i`-th coordinate of `u_k`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{LatticeError, Result};
use crate::lattice::{dual, orthogonal_complement, Lattice};
use crate::par;
use crate::ratmat::{dot, is_positive_semidefinite, rat, serde_rational, Matrix, Rational, SymMatrix};
use crate::shortvec::{self, ShortVector};
use crate::solver::{self, SearchOutcome, System};

/// Default node limit for [`decide_s_integrable`].
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarEntry {
    /// Coordinates in the dual basis.
    pub coords: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_row")]
    pub vector: Option<Vec<Rational>>,
    pub multiplicity: u64,
}

mod opt_row {
    use super::*;
    pub fn serialize<S: serde::Serializer>(v: &Option<Vec<Rational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(r) => serde_rational::row::serialize(r, s),
            None => s.serialize_none(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EutacticCertificate {
    pub scale: u64,
    pub entries: Vec<StarEntry>,
}

impl EutacticCertificate {
    /// Star vectors with repetition, in ambient coordinates.
    pub fn expanded_vectors(&self) -> Option<Vec<Vec<Rational>>> {
        let mut out = Vec::new();
        for e in &self.entries {
            let v = e.vector.as_ref()?;
            for _ in 0..e.multiplicity {
                out.push(v.clone());
            }
        }
        Some(out)
    }

    /// Checks `Σ_k x_k (w_a, u_k)(w_b, u_k) = s·G_ab` on the basis of `l`.
    pub fn verify(&self, l: &Lattice) -> bool {
        let n = l.rank();
        let s = rat(self.scale as i64);
        for a in 0..n {
            for b in a..n {
                let mut sum: i128 = 0;
                for e in &self.entries {
                    if e.coords.len() != n {
                        return false;
                    }
                    sum += e.multiplicity as i128 * e.coords[a] as i128 * e.coords[b] as i128;
                }
                if Rational::from_integer(sum.into()) != &s * &l.gram()[(a, b)] {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Integrability {
    Integrable { certificate: EutacticCertificate },
    NotIntegrable,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decision {
    #[serde(flatten)]
    pub outcome: Integrability,
    pub scale: u64,
    /// Antipodal classes of dual vectors of norm at most `s`.
    pub variables: usize,
    pub equations: usize,
    pub implied_equations: usize,
    pub nodes: u64,
    pub budget: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct DecideOptions {
    pub budget: u64,
    /// Adds the (redundant) equations of short lattice vectors up to this
    /// norm as cuts. `None` keeps only the `w_i + w_j` system.
    pub implied_cut_norm: Option<i64>,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { budget: DEFAULT_BUDGET, implied_cut_norm: Some(4) }
    }
}

/// `Σ_i (w_a, s_i)(w_b, s_i) = s·(w_a, w_b)` for every pair of basis vectors
/// `w_a, w_b` of the subspace.
pub fn is_eutactic_star(vectors: &[Vec<Rational>], subspace_basis: &[Vec<Rational>], s: u64) -> Result<bool> {
    if subspace_basis.is_empty() {
        return Ok(vectors.iter().all(|v| v.iter().all(Zero::is_zero)));
    }
    let basis = Matrix::from_rows(subspace_basis.to_vec())?;
    let span = Lattice::abstract_gram(SymMatrix::gram_of_rows(&basis))
        .map_err(|_| LatticeError::Invalid("subspace basis is dependent".into()))?;
    let gi = span.gram().inverse().expect("definite");
    for v in vectors {
        if v.len() != basis.cols() {
            return Err(LatticeError::DimensionMismatch("star vector length".into()));
        }
        let pairings: Vec<Rational> = basis.row_iter().map(|b| dot(b, v)).collect();
        let x = gi.as_matrix().left_apply(&pairings)?;
        if basis.left_apply(&x)? != *v {
            return Err(LatticeError::Invalid("star vector outside the subspace".into()));
        }
    }
    let s = rat(s as i64);
    let n = basis.rows();
    let ip: Vec<Vec<Rational>> = vectors.iter().map(|v| basis.row_iter().map(|b| dot(b, v)).collect()).collect();
    for a in 0..n {
        for b in a..n {
            let lhs = ip.iter().fold(Rational::zero(), |acc, r| acc + &r[a] * &r[b]);
            if lhs != &s * dot(basis.row(a), basis.row(b)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Necessary condition `(2 - |su|²)(2 - |sv|²) ≥ (δ/2)²` for two star
/// vectors of scale 2 lifting to norm-2 vectors with inner product `δ`.
pub fn pair_psd_filter(su: &[Rational], sv: &[Rational], delta: &Rational) -> bool {
    pair_norms_pass(&dot(su, su), &dot(sv, sv), delta)
}

/// [`pair_psd_filter`] on the squared norms directly.
pub fn pair_norms_pass(alpha: &Rational, gamma: &Rational, delta: &Rational) -> bool {
    let two = rat(2);
    let half = delta / rat(2);
    (&two - alpha) * (&two - gamma) >= &half * &half
}

fn first_nonzero_positive(c: &[i64]) -> bool {
    c.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

struct Built {
    system: System,
    reps: Vec<ShortVector>,
    pair_equations: usize,
}

fn build_system(l: &Lattice, s: u64, implied_cut_norm: Option<i64>) -> Result<Built> {
    let n = l.rank();
    let d = dual(l);
    let mut reps: Vec<ShortVector> = shortvec::vectors_up_to(&d, &rat(s as i64))?
        .vectors
        .into_iter()
        .filter(|v| first_nonzero_positive(&v.coords))
        .collect();
    reps.sort_by(|a, b| a.coords.cmp(&b.coords));
    let to_u64 = |q: &Rational| q.to_integer().to_u64().expect("right-hand side fits");

    let mut tests: Vec<Vec<i64>> = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut w = vec![0i64; n];
            w[i] += 1;
            w[j] += 1;
            tests.push(w);
        }
    }
    let pair_equations = tests.len();
    if let Some(bound) = implied_cut_norm {
        let mut seen: HashSet<Vec<i64>> = tests.iter().cloned().collect();
        for w in shortvec::vectors_up_to(l, &rat(bound))?.vectors {
            if first_nonzero_positive(&w.coords) && seen.insert(w.coords.clone()) {
                tests.push(w.coords);
            }
        }
    }

    let sq = rat(s as i64);
    let mut rows = Vec::with_capacity(tests.len());
    let mut rhs = Vec::with_capacity(tests.len());
    let mut seen_rows: HashSet<(Vec<u64>, u64)> = HashSet::new();
    for (idx, w) in tests.iter().enumerate() {
        let coeffs: Vec<u64> = reps
            .iter()
            .map(|u| {
                let p: i64 = w.iter().zip(&u.coords).map(|(a, b)| a * b).sum();
                (p * p) as u64
            })
            .collect();
        let wq: Vec<Rational> = w.iter().map(|&x| rat(x)).collect();
        let r = to_u64(&(&sq * l.gram().bilinear(&wq, &wq)));
        if idx < pair_equations || seen_rows.insert((coeffs.clone(), r)) {
            if idx < pair_equations {
                seen_rows.insert((coeffs.clone(), r));
            }
            rows.push(coeffs);
            rhs.push(r);
        }
    }
    Ok(Built { system: System::new(rows, rhs), reps, pair_equations })
}

/// Decides s-integrability by exhaustive non-negative integer search.
pub fn decide_s_integrable(l: &Lattice, s: u64, opts: DecideOptions) -> Result<Decision> {
    if s == 0 {
        return Err(LatticeError::Invalid("scale must be positive".into()));
    }
    if !l.is_integral() {
        return Err(LatticeError::NotIntegral);
    }
    let built = build_system(l, s, opts.implied_cut_norm)?;
    let variables = built.reps.len();
    let equations = built.system.equations();
    let search = solver::solve(&built.system, opts.budget);
    let outcome = match search.outcome {
        SearchOutcome::Solution(x) => {
            let entries = built
                .reps
                .iter()
                .zip(&x)
                .filter(|(_, &m)| m > 0)
                .map(|(u, &m)| StarEntry { coords: u.coords.clone(), vector: u.vector.clone(), multiplicity: m })
                .collect();
            Integrability::Integrable { certificate: EutacticCertificate { scale: s, entries } }
        }
        SearchOutcome::Infeasible => Integrability::NotIntegrable,
        SearchOutcome::BudgetExhausted => Integrability::BudgetExhausted,
    };
    Ok(Decision {
        outcome,
        scale: s,
        variables,
        equations: built.pair_equations,
        implied_equations: equations - built.pair_equations,
        nodes: search.nodes,
        budget: opts.budget,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefutationMode {
    /// One of the three structural conditions failed; nothing is proved.
    PreconditionFailed,
    /// Every qualifying pair has `2I - G` indefinite: not 2-integrable.
    AllPairsViolate,
    /// Some qualifying pair has `2I - G` semidefinite; nothing is proved.
    PairSatisfied,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairClass {
    #[serde(with = "serde_rational")]
    pub norm_u: Rational,
    #[serde(with = "serde_rational")]
    pub norm_v: Rational,
    /// `|(ρu, ρv)|`.
    #[serde(with = "serde_rational")]
    pub inner: Rational,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RefutationCertificate {
    /// 1-based ambient coordinates.
    pub support_set: Vec<usize>,
    pub mode: RefutationMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(with = "serde_rational")]
    pub dual_minimum: Rational,
    pub roots: usize,
    /// Ordered pairs passing the support and product filters.
    pub pairs_checked: usize,
    /// Distinct projected Gram matrices among the checked pairs.
    pub pair_classes: Vec<PairClass>,
}

impl RefutationCertificate {
    pub fn proves_non_integrable(&self) -> bool {
        self.mode == RefutationMode::AllPairsViolate
    }
}

pub(crate) fn support(v: &[Rational]) -> BTreeSet<usize> {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, _)| i + 1).collect()
}

/// Orthogonal projection onto the span of `n` (ambient coordinates).
pub fn projector(n: &Lattice) -> Result<impl Fn(&[Rational]) -> Vec<Rational> + Sync + '_> {
    let b = n.basis().ok_or(LatticeError::NoCoordinates)?;
    let gi = n.gram().inverse().expect("definite");
    Ok(move |v: &[Rational]| {
        let p: Vec<Rational> = b.row_iter().map(|r| dot(r, v)).collect();
        let x = gi.as_matrix().left_apply(&p).expect("shapes agree");
        b.left_apply(&x).expect("shapes agree")
    })
}

/// Norm-2 vectors of a lattice with coordinates, in ambient form.
pub fn roots(l: &Lattice) -> Result<Vec<Vec<Rational>>> {
    if l.basis().is_none() {
        return Err(LatticeError::NoCoordinates);
    }
    Ok(shortvec::vectors_up_to(l, &rat(2))?
        .vectors
        .into_iter()
        .filter(|v| v.norm == rat(2))
        .map(|v| v.vector.expect("ambient coordinates"))
        .collect())
}

/// Proves `N = M^⊥ ⊂ L` non 2-integrable from pair constraints on projected
/// roots, after checking the structural preconditions.
pub fn refute_2_integrability(big: &Lattice, m: &Lattice, x: &[usize]) -> Result<RefutationCertificate> {
    if x.len() < 3 {
        return Err(LatticeError::Invalid("support set needs at least three coordinates".into()));
    }
    if !big.is_unimodular() {
        return Err(LatticeError::Invalid("ambient lattice must be unimodular".into()));
    }
    let dim = big.ambient_dim().ok_or(LatticeError::NoCoordinates)?;
    if x.iter().any(|&i| i == 0 || i > dim) {
        return Err(LatticeError::Invalid("support index out of range".into()));
    }
    let xs: BTreeSet<usize> = x.iter().copied().collect();
    let n = orthogonal_complement(big, m)?;
    let nd = dual(&n);
    let rho = projector(&n)?;
    let r = roots(big)?;
    let dual_minimum = shortvec::minimum(&nd)?;
    let mut cert = RefutationCertificate {
        support_set: xs.iter().copied().collect(),
        mode: RefutationMode::PreconditionFailed,
        witness: None,
        dual_minimum: dual_minimum.clone(),
        roots: r.len(),
        pairs_checked: 0,
        pair_classes: Vec::new(),
    };

    if dual_minimum <= rat(1) {
        cert.witness = Some("dual minimum is at most 1".into());
        return Ok(cert);
    }
    let projected: Vec<Vec<Rational>> = par::map(&r, |v| rho(v));
    let image: BTreeSet<&Vec<Rational>> = projected.iter().collect();
    for w in shortvec::vectors_up_to(&nd, &rat(2))?.vectors {
        let v = w.vector.expect("coordinates");
        if !image.contains(&v) {
            cert.witness = Some(format!("dual vector {} is not a projected root", crate::ratmat::format_row(&v)));
            return Ok(cert);
        }
    }
    for v in &r {
        if support(v).is_subset(&xs) && !n.contains(v) {
            cert.witness = Some(format!("root {} supported in X is not in N", crate::ratmat::format_row(v)));
            return Ok(cert);
        }
    }

    let supports: Vec<BTreeSet<usize>> = r.iter().map(|v| support(v)).collect();
    let norms: Vec<Rational> = projected.iter().map(|p| dot(p, p)).collect();
    let one = rat(1);
    let idx: Vec<usize> = (0..r.len()).collect();
    let per_row: Vec<(usize, Option<String>, Vec<(Rational, Rational, Rational)>)> = par::map(&idx, |&i| {
        let mut checked = 0;
        let mut classes = Vec::new();
        for j in 0..r.len() {
            if i == j || r[i].iter().zip(&r[j]).all(|(a, b)| *a == -b.clone()) {
                continue;
            }
            if supports[i].intersection(&supports[j]).all(|k| !xs.contains(k)) {
                continue;
            }
            if !pair_psd_filter(&projected[i], &projected[j], &one) {
                continue;
            }
            checked += 1;
            let beta = dot(&projected[i], &projected[j]);
            if is_positive_semidefinite(&pair_gram_defect(&projected[i], &projected[j])) {
                let w = format!(
                    "pair {} / {} has 2I - G semidefinite",
                    crate::ratmat::format_row(&r[i]),
                    crate::ratmat::format_row(&r[j])
                );
                return (checked, Some(w), classes);
            }
            classes.push((norms[i].clone(), norms[j].clone(), beta.abs()));
        }
        (checked, None, classes)
    });

    let mut tally: BTreeMap<(Rational, Rational, Rational), usize> = BTreeMap::new();
    for (checked, failure, classes) in per_row {
        cert.pairs_checked += checked;
        if let Some(w) = failure {
            if cert.witness.is_none() {
                cert.witness = Some(w);
                cert.mode = RefutationMode::PairSatisfied;
            }
        }
        for c in classes {
            *tally.entry(c).or_default() += 1;
        }
    }
    cert.pair_classes =
        tally.into_iter().map(|((norm_u, norm_v, inner), count)| PairClass { norm_u, norm_v, inner, count }).collect();
    if cert.witness.is_none() {
        cert.mode = RefutationMode::AllPairsViolate;
    }
    Ok(cert)
}

/// The quantity bounded in the scale-`s` counting inequality: for `w` and a
/// star avoiding `Qw`, `s(w,w) ≤ #{i : (w,s_i) ≠ 0} · ⌈√(s(w,w)) - 1⌉²`.
pub fn counting_bound(star: &[Vec<Rational>], w: &[Rational], s: u64) -> (Rational, Rational) {
    let sw = rat(s as i64) * dot(w, w);
    let hits = star.iter().filter(|v| !dot(w, v).is_zero()).count() as i64;
    // ⌈√x - 1⌉ is the least integer k with (k + 1)² ≥ x
    let mut k: i64 = 0;
    while rat((k + 1) * (k + 1)) < sw {
        k += 1;
    }
    (sw, rat(hits * k * k))
}

/// `2I - G` for two vectors.
pub fn pair_gram_defect(u: &[Rational], v: &[Rational]) -> SymMatrix {
    let two = rat(2);
    let b = -dot(u, v);
    SymMatrix::from_rows(vec![vec![&two - dot(u, u), b.clone()], vec![b, &two - dot(v, v)]]).expect("symmetric")
}
