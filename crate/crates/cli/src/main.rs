use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use latint::a15;
use latint::embedding::{embed_odd_unimodular_feasible, embed_unimodular_feasible};
use latint::eutactic::{
    decide_s_integrable, refute_2_integrability, DecideOptions, Integrability, RefutationMode, DEFAULT_BUDGET,
};
use latint::lattice::{orthogonal_complement, LatticeDocument};
use latint::local::{local_invariant, relevant_places};
use latint::ratmat::{format_rational, Rational, SymMatrix};
use latint::verify::{overall, verify_paper, Claim, Status, VerifyOptions};
use latint::{shortvec, Lattice, LatticeError};
use serde::Serialize;
use serde_json::{json, Value};

/// Exact computations on integral lattices.
#[derive(Parser)]
#[command(name = "latint", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ilp,
    Refute,
}

#[derive(Subcommand)]
enum Command {
    /// Local invariants at infinity and at every prime dividing 2·det.
    Invariants { file: PathBuf },
    /// Whether the lattice embeds in a unimodular lattice of the given rank.
    Embed {
        #[arg(long)]
        rank: usize,
        /// Require an odd unimodular target (sufficient conditions only).
        #[arg(long)]
        odd: bool,
        file: PathBuf,
    },
    /// All nonzero lattice vectors of norm at most the bound.
    Shortvec {
        /// A rational such as `3` or `16/15`.
        #[arg(long)]
        bound: String,
        file: PathBuf,
    },
    /// Decide whether `sqrt(s)` times the lattice embeds in some `Z^n`.
    SInt {
        #[arg(long)]
        scale: u64,
        #[arg(long, value_enum, default_value_t = Method::Ilp)]
        method: Method,
        /// Coordinate set for the refutation, e.g. `9-16` or `1,2,5`.
        #[arg(long)]
        support: Option<String>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Largest norm of short vectors added as redundant equations (0 disables).
        #[arg(long, default_value_t = 4)]
        cut_norm: u32,
        file: PathBuf,
    },
    /// Recompute every claim about `A15+` and its rank-12 complements.
    VerifyPaper {
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Skip the exhaustive 2-integrability searches.
        #[arg(long)]
        skip_search: bool,
    },
    /// Orbits of norm-3 triples in `A15+` with a given 3x3 Gram matrix.
    Classify {
        file: PathBuf,
        /// Cross-check the orbit count by random relabelling (samples per triple).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ExitStatus {
    Ok,
    Fail,
    Unknown,
}

impl ExitStatus {
    fn code(self) -> u8 {
        match self {
            ExitStatus::Ok => 0,
            ExitStatus::Fail => 1,
            ExitStatus::Unknown => 3,
        }
    }
}

#[derive(Serialize)]
struct Report {
    command: &'static str,
    inputs: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    results: Vec<Claim>,
    output: Value,
    exit_status: ExitStatus,
}

/// Marks errors caused by the user's input (exit code 2).
#[derive(Debug)]
struct BadInput(String);

impl std::fmt::Display for BadInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadInput {}

fn bad(e: impl std::fmt::Display) -> anyhow::Error {
    BadInput(e.to_string()).into()
}

fn read_document(path: &Path) -> Result<LatticeDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    LatticeDocument::parse(&text).map_err(bad)
}

fn read_lattice(path: &Path) -> Result<(LatticeDocument, Lattice)> {
    let doc = read_document(path)?;
    let l = doc.to_lattice().map_err(bad)?;
    Ok((doc, l))
}

fn read_gram(path: &Path) -> Result<(LatticeDocument, SymMatrix)> {
    let (doc, l) = read_lattice(path)?;
    Ok((doc, l.gram().clone()))
}

fn parse_rational(s: &str) -> Result<Rational> {
    let q = match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad(LatticeError::ParseRational(s.into())))?;
            let d: i64 = d.trim().parse().map_err(|_| bad(LatticeError::ParseRational(s.into())))?;
            if d == 0 {
                bail!(bad(LatticeError::ParseRational(s.into())));
            }
            latint::ratmat::frac(n, d)
        }
        None => latint::ratmat::rat(s.trim().parse().map_err(|_| bad(LatticeError::ParseRational(s.into())))?),
    };
    Ok(q)
}

/// Parses `9-16`, `9..16` or `1,2,5` (1-based, inclusive ranges, mixable).
fn parse_support(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let range = part.split_once("..").or_else(|| part.split_once('-'));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad(format!("bad support entry {part:?}")));
        match range {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    bail!(bad(format!("empty range {part:?}")));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() || out[0] == 0 {
        bail!(bad(format!("support {s:?} must list 1-based coordinates")));
    }
    Ok(out)
}

fn echo(doc: &LatticeDocument, path: &Path) -> Value {
    json!({ "file": path.display().to_string(), "lattice": doc })
}

fn invariants(path: &Path) -> Result<Report> {
    let (doc, g) = read_gram(path)?;
    let det = g.determinant();
    let mut out = Vec::new();
    for place in relevant_places(&det) {
        out.push(local_invariant(&g, place).map_err(bad)?);
    }
    Ok(Report {
        command: "invariants",
        inputs: echo(&doc, path),
        results: Vec::new(),
        output: json!({ "determinant": format_rational(&det), "invariants": out }),
        exit_status: ExitStatus::Ok,
    })
}

fn embed(path: &Path, rank: usize, odd: bool) -> Result<Report> {
    let (doc, g) = read_gram(path)?;
    let v =
        if odd { embed_odd_unimodular_feasible(&g, rank) } else { embed_unimodular_feasible(&g, rank) }.map_err(bad)?;
    let status = if v.feasible { ExitStatus::Ok } else { ExitStatus::Fail };
    let mut inputs = echo(&doc, path);
    inputs["rank"] = json!(rank);
    inputs["odd"] = json!(odd);
    Ok(Report { command: "embed", inputs, results: Vec::new(), output: serde_json::to_value(v)?, exit_status: status })
}

fn short_vectors(path: &Path, bound: &str) -> Result<Report> {
    let (doc, l) = read_lattice(path)?;
    let b = parse_rational(bound)?;
    let set = shortvec::vectors_up_to(&l, &b).map_err(bad)?;
    let mut inputs = echo(&doc, path);
    inputs["bound"] = json!(format_rational(&b));
    let mut output = serde_json::to_value(&set)?;
    output["count"] = json!(set.len());
    Ok(Report { command: "shortvec", inputs, results: Vec::new(), output, exit_status: ExitStatus::Ok })
}

struct SIntArgs<'a> {
    scale: u64,
    method: Method,
    support: Option<&'a str>,
    budget: u64,
    cut_norm: u32,
}

fn s_int(path: &Path, a: SIntArgs<'_>) -> Result<Report> {
    let (doc, l) = read_lattice(path)?;
    let mut inputs = echo(&doc, path);
    inputs["scale"] = json!(a.scale);
    match a.method {
        Method::Ilp => {
            let cut = (a.cut_norm > 0).then_some(i64::from(a.cut_norm));
            let opts = DecideOptions { budget: a.budget, implied_cut_norm: cut };
            let d = decide_s_integrable(&l, a.scale, opts).map_err(bad)?;
            let status = match d.outcome {
                Integrability::Integrable { .. } => ExitStatus::Ok,
                Integrability::NotIntegrable => ExitStatus::Fail,
                Integrability::BudgetExhausted => ExitStatus::Unknown,
            };
            inputs["method"] = json!("ilp");
            inputs["budget"] = json!(a.budget);
            inputs["cut_norm"] = json!(a.cut_norm);
            Ok(Report {
                command: "s-int",
                inputs,
                results: Vec::new(),
                output: serde_json::to_value(d)?,
                exit_status: status,
            })
        }
        Method::Refute => {
            if a.scale != 2 {
                bail!(bad("the pair refutation only applies to scale 2"));
            }
            let support = parse_support(a.support.ok_or_else(|| bad("--support is required for --method refute"))?)?;
            // the lattice is taken as a sublattice N of A15+; M is its complement there
            let big = a15::build_a15_plus();
            if l.ambient_dim() != Some(a15::DIM) {
                bail!(bad("refutation needs explicit generators in 16 coordinates"));
            }
            if *support.last().expect("nonempty") > a15::DIM {
                bail!(bad("support exceeds 16 coordinates"));
            }
            let m = orthogonal_complement(&big, &l).map_err(bad)?;
            let cert = refute_2_integrability(&big, &m, &support).map_err(bad)?;
            let status =
                if cert.mode == RefutationMode::AllPairsViolate { ExitStatus::Fail } else { ExitStatus::Unknown };
            inputs["method"] = json!("refute");
            inputs["support"] = json!(support);
            Ok(Report {
                command: "s-int",
                inputs,
                results: Vec::new(),
                output: serde_json::to_value(cert)?,
                exit_status: status,
            })
        }
    }
}

fn verify(budget: u64, skip_search: bool) -> Result<Report> {
    let claims = verify_paper(&VerifyOptions { budget, ilp: !skip_search })?;
    let status = match overall(&claims) {
        Status::Pass => ExitStatus::Ok,
        Status::Fail => ExitStatus::Fail,
        Status::Unknown => ExitStatus::Unknown,
    };
    let passed = claims.iter().filter(|c| c.status == Status::Pass).count();
    Ok(Report {
        command: "verify-paper",
        inputs: json!({ "budget": budget, "search": !skip_search }),
        output: json!({ "claims": claims.len(), "passed": passed }),
        results: claims,
        exit_status: status,
    })
}

fn named_match(
    orbit: &a15::TripleOrbit,
    target: &SymMatrix,
    orbits: &[a15::TripleOrbit],
    named: &[(&str, [a15::NormThreeVector; 3])],
) -> Vec<String> {
    named
        .iter()
        .filter(|(_, t)| {
            let idx = a15::orbit_index(target, orbits, t).ok().flatten();
            idx.is_some_and(|i| &orbits[i] == orbit)
        })
        .map(|(n, _)| n.to_string())
        .collect()
}

fn classify(path: &Path, samples: Option<usize>, seed: u64) -> Result<Report> {
    let (doc, g) = read_gram(path)?;
    let orbits = a15::classify_norm3_triples(&g).map_err(bad)?;
    let named = [
        ("<a,b,c>", [a15::a(), a15::b(), a15::c()]),
        ("<a,b,c'>", [a15::a(), a15::b(), a15::c1()]),
        ("<a,b,c''>", [a15::a(), a15::b(), a15::c2()]),
        ("<a,b,c'''>", [a15::a(), a15::b(), a15::c3()]),
    ];
    let listed: Vec<Value> = orbits
        .iter()
        .map(|o| {
            let mut v = serde_json::to_value(o).expect("orbit serializes");
            v["contains"] = json!(named_match(o, &g, &orbits, &named));
            v
        })
        .collect();
    let mut output = json!({ "orbit_count": orbits.len(), "orbits": listed });
    let mut results = Vec::new();
    let mut status = ExitStatus::Ok;
    if let Some(k) = samples {
        let sampled = a15::sampled_orbit_count(&g, k, seed).map_err(bad)?;
        output["sampled_orbit_count"] = json!(sampled);
        let claim = Claim::check("orbit count agrees with random relabelling", orbits.len(), sampled);
        if claim.status != Status::Pass {
            status = ExitStatus::Fail;
        }
        results.push(claim);
    }
    Ok(Report { command: "classify", inputs: echo(&doc, path), results, output, exit_status: status })
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Unknown => "UNKNOWN",
    }
}

fn render_text(r: &Report) -> String {
    let mut out =
        format!("{}: {}\n", r.command, serde_json::to_value(r.exit_status).expect("status").as_str().unwrap_or(""));
    for c in &r.results {
        out.push_str(&format!(
            "{:<7} {} (expected {}, computed {})\n",
            status_word(c.status),
            c.claim,
            c.expected,
            c.computed
        ));
    }
    if let Value::Object(map) = &r.output {
        for (k, v) in map {
            let shown = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k}: {shown}\n"));
        }
    }
    out
}

fn run(cli: Cli) -> Result<Report> {
    match cli.command {
        Command::Invariants { file } => invariants(&file),
        Command::Embed { rank, odd, file } => embed(&file, rank, odd),
        Command::Shortvec { bound, file } => short_vectors(&file, &bound),
        Command::SInt { scale, method, support, budget, cut_norm, file } => {
            s_int(&file, SIntArgs { scale, method, support: support.as_deref(), budget, cut_norm })
        }
        Command::VerifyPaper { budget, skip_search } => verify(budget, skip_search),
        Command::Classify { file, samples, seed } => classify(&file, samples, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(report) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
                Format::Text => print!("{}", render_text(&report)),
            }
            ExitCode::from(report.exit_status.code())
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<BadInput>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
