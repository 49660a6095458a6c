//! End-to-end check of the `A15+` results: every claim is recomputed and
//! compared with its tabulated value.

use std::fmt::Display;

use serde::Serialize;

use crate::a15::{self, NamedLattice};
use crate::embedding::rank12_exception_determinants;
use crate::error::Result;
use crate::eutactic::{decide_s_integrable, refute_2_integrability, DecideOptions, Integrability, DEFAULT_BUDGET};
use crate::lattice::{coset_profile, dual, Lattice};
use crate::ratmat::{dot, format_rational, format_row, frac, rat, Matrix, Rational};
use crate::shortvec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub claim: String,
    pub expected: String,
    pub computed: String,
    pub status: Status,
}

impl Claim {
    pub fn check(claim: impl Into<String>, expected: impl Display, computed: impl Display) -> Self {
        let (expected, computed) = (expected.to_string(), computed.to_string());
        let status = if expected == computed { Status::Pass } else { Status::Fail };
        Claim { claim: claim.into(), expected, computed, status }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Node budget per branch-and-bound run.
    pub budget: u64,
    /// Also decide 2-integrability of the complements by exhaustive search.
    pub ilp: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { budget: DEFAULT_BUDGET, ilp: true }
    }
}

/// `(i, numerators, denominator, norm)` for `ρ(e_i - e_16)`.
type ProjectionRow = (usize, Vec<i64>, i64, Rational);

fn rep(x: i64, n: usize) -> Vec<i64> {
    vec![x; n]
}

fn cat(parts: &[Vec<i64>]) -> Vec<i64> {
    parts.concat()
}

fn projection_rows(name: &str) -> Vec<ProjectionRow> {
    match name {
        "N" => vec![
            (1, cat(&[vec![27, -13, -13, -1, -1, -9, -9, -9], rep(11, 7), vec![-49]]), 60, frac(19, 15)),
            (2, cat(&[vec![-3, 7, -3, -1, -1], rep(1, 10), vec![-9]]), 10, frac(8, 5)),
            (4, cat(&[vec![-3, -3, -3, 9, 9], rep(1, 10), vec![-19]]), 20, frac(7, 5)),
            (6, cat(&[vec![-3, 1, 1, 1, 1, 9, -3, -3], rep(1, 7), vec![-11]]), 12, frac(5, 3)),
            (9, cat(&[rep(0, 8), vec![1], rep(0, 6), vec![-1]]), 1, rat(2)),
        ],
        "N'" => vec![
            (1, cat(&[vec![7, -3, -3, -1, -1], rep(1, 10), vec![-9]]), 10, frac(8, 5)),
            (4, cat(&[vec![-1, -1, -1, 3, 3, -3, -3], rep(2, 8), vec![-13]]), 15, frac(16, 15)),
            (6, cat(&[vec![1, 1, 1, -3, -3, 9, -3], rep(1, 8), vec![-11]]), 12, frac(5, 3)),
            (8, cat(&[rep(0, 7), vec![1], rep(0, 7), vec![-1]]), 1, rat(2)),
        ],
        _ => Vec::new(),
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn structure(out: &mut Vec<Claim>) -> Result<()> {
    let l = a15::build_a15_plus();
    out.push(Claim::check("A15+ rank", 15, l.rank()));
    out.push(Claim::check("A15+ determinant", 1, l.determinant()));
    out.push(Claim::check("A15+ parity", "odd", format!("{:?}", l.parity()?).to_lowercase()));
    out.push(Claim::check("A15+ minimum", 2, shortvec::minimum(&l)?));
    let c = a15::census()?;
    out.push(Claim::check("A15+ vectors of norm 2", 240, c.norm2));
    out.push(Claim::check("A15+ vectors of norm 3", 3640, c.norm3));
    out.push(Claim::check("A15+ norm-3 vectors are all ±t_I", "yes", yes_no(c.norm3_all_t)));
    Ok(())
}

fn classification(out: &mut Vec<Claim>) -> Result<()> {
    let g12 = a15::gram_12();
    let orbits = a15::classify_norm3_triples(&g12)?;
    out.push(Claim::check("orbits of norm-3 triples with Gram [[3,2,0],[2,3,0],[0,0,3]]", 2, orbits.len()));
    let i = a15::orbit_index(&g12, &orbits, &[a15::a(), a15::b(), a15::c()])?;
    let j = a15::orbit_index(&g12, &orbits, &[a15::a(), a15::b(), a15::c1()])?;
    out.push(Claim::check(
        "<a,b,c> and <a,b,c'> represent both orbits",
        "yes",
        yes_no(i.is_some() && j.is_some() && i != j),
    ));
    let g11 = a15::gram_11();
    let orbits = a15::classify_norm3_triples(&g11)?;
    out.push(Claim::check("orbits of norm-3 triples with Gram [[3,2,2],[2,3,2],[2,2,3]]", 2, orbits.len()));
    let i = a15::orbit_index(&g11, &orbits, &[a15::a(), a15::b(), a15::c2()])?;
    let j = a15::orbit_index(&g11, &orbits, &[a15::a(), a15::b(), a15::c3()])?;
    out.push(Claim::check(
        "<a,b,c''> and <a,b,c'''> represent both orbits",
        "yes",
        yes_no(i.is_some() && j.is_some() && i != j),
    ));
    Ok(())
}

fn per_lattice(nl: &NamedLattice, opts: &VerifyOptions, out: &mut Vec<Claim>) -> Result<()> {
    let name = nl.name;
    let det = if name.matches('\'').count() >= 2 { 7 } else { 15 };
    out.push(Claim::check(format!("{name} rank"), 12, nl.n.rank()));
    out.push(Claim::check(format!("{name} determinant"), det, nl.n.determinant()));
    let dmin = shortvec::minimum(&dual(&nl.n))?;
    let expected_min = if det == 15 { frac(16, 15) } else { frac(8, 7) };
    out.push(Claim::check(format!("{name} dual minimum"), format_rational(&expected_min), format_rational(&dmin)));
    out.push(Claim::check(
        format!("{name} dual vectors of norm <= 2 lift to roots"),
        "yes",
        yes_no(a15::dual_vectors_lift_to_roots(&nl.n)?),
    ));

    let big = a15::build_a15_plus();
    for (i, nums, den, norm) in projection_rows(name) {
        let expected: Vec<Rational> = nums.iter().map(|&x| frac(x, den)).collect();
        let p = a15::project_to_complement(&big, &nl.n, &a15::root(i, 16))?;
        out.push(Claim::check(format!("{name}: projection of e{i} - e16"), format_row(&expected), format_row(&p)));
        let got = dot(&p, &p);
        out.push(Claim::check(
            format!("{name}: norm of projection of e{i} - e16"),
            format_rational(&norm),
            format_rational(&got),
        ));
    }

    let cert = refute_2_integrability(&big, &nl.m, &nl.support_set)?;
    out.push(Claim::check(
        format!("{name} non 2-integrable by pair refutation on X = {{{}..16}}", nl.support_set[0]),
        "all-pairs-violate",
        serde_json::to_value(cert.mode).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
    ));
    if opts.ilp {
        let d = decide_s_integrable(&nl.n, 2, DecideOptions { budget: opts.budget, ..Default::default() })?;
        let computed = match d.outcome {
            Integrability::NotIntegrable => "not-integrable".to_string(),
            Integrability::Integrable { .. } => "integrable".to_string(),
            Integrability::BudgetExhausted => format!("budget-exhausted after {} nodes", d.nodes),
        };
        let mut claim =
            Claim::check(format!("{name} non 2-integrable by exhaustive search"), "not-integrable", computed);
        if matches!(d.outcome, Integrability::BudgetExhausted) {
            claim.status = Status::Unknown;
        }
        out.push(claim);
    }
    Ok(())
}

/// Runs every check; the order of the returned claims is fixed.
pub fn verify_paper(opts: &VerifyOptions) -> Result<Vec<Claim>> {
    let mut out = Vec::new();
    structure(&mut out)?;
    classification(&mut out)?;
    let named = a15::named_lattices()?;

    let profile = coset_profile(&named[0].m)?;
    let census: Vec<String> =
        profile.norm_census().iter().map(|(n, k)| format!("{}x{}", format_rational(n), k)).collect();
    out.push(Claim::check("coset minimal norms of <a,b,c>", "1/3x2 2/5x2 3/5x2 11/15x4 14/15x4", census.join(" ")));

    for nl in &named {
        per_lattice(nl, opts, &mut out)?;
    }

    let k0 = shortvec::kissing_number(&named[0].n)?;
    let k1 = shortvec::kissing_number(&named[1].n)?;
    out.push(Claim::check("N kissing number", 64, k0));
    out.push(Claim::check("N' kissing number", 80, k1));
    out.push(Claim::check("N and N' are non-isometric", "yes", yes_no(k0 != k1)));
    for nl in &named[..2] {
        let m = a15::check_minimality(&nl.n)?;
        let span = Lattice::from_generators(&Matrix::from_rows(m.witness.clone())?)?;
        let witness = (9..16).all(|i| span.contains(&a15::root(i, i + 1)));
        out.push(Claim::check(
            format!("{} minimal non 1-integrable, witness contains <e9-e10,...,e15-e16>", nl.name),
            "yes",
            yes_no(m.holds && witness),
        ));
    }
    let ex: Vec<String> = rank12_exception_determinants().iter().map(u64::to_string).collect();
    out.push(Claim::check(
        "rank-12 determinants not covered by the sufficient condition",
        "7 15 18 23 25",
        ex.join(" "),
    ));
    Ok(out)
}

/// `fail` if any claim fails, else `unknown` if any is undecided, else `ok`.
pub fn overall(claims: &[Claim]) -> Status {
    if claims.iter().any(|c| c.status == Status::Fail) {
        Status::Fail
    } else if claims.iter().any(|c| c.status == Status::Unknown) {
        Status::Unknown
    } else {
        Status::Pass
    }
}
