//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#![allow(clippy::type_complexity)]

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use latint::a15::{self, NamedLattice};
use latint::embedding::{
    diagonal_invariant, embed_unimodular_feasible, maximal_rep_gram, rank12_exception_determinants,
};
use latint::eutactic::{
    decide_s_integrable, is_eutactic_star, refute_2_integrability, DecideOptions, Integrability, RefutationMode,
};
use latint::lattice::{coset_profile, dual, Lattice, Parity};
use latint::local::{
    hasse_of_diagonal, hilbert_symbol, qp_space_exists, relevant_places, square_class, LocalInvariant, Place,
};
use latint::ratmat::{dot, frac, rat, Matrix, Rational, SymMatrix};
use latint::shortvec;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn named() -> Result<Vec<NamedLattice>, String> {
    a15::named_lattices().map_err(err)
}

fn structure() -> Outcome {
    let l = a15::build_a15_plus();
    ensure!(l.rank() == 15, "rank {}", l.rank());
    ensure!(l.determinant() == rat(1), "det {}", l.determinant());
    ensure!(l.parity().map_err(err)? == Parity::Odd, "even");
    let min = shortvec::minimum(&l).map_err(err)?;
    ensure!(min == rat(2), "minimum {min}");
    let c = a15::census().map_err(err)?;
    ensure!(c.norm2 == 240 && c.norm3 == 3640 && c.norm3_all_t, "census {} / {}", c.norm2, c.norm3);
    Ok("det 1, rank 15, odd, min 2, 240 roots, 3640 norm-3 vectors".into())
}

fn classification() -> Outcome {
    let g12 = a15::gram_12();
    let o12 = a15::classify_norm3_triples(&g12).map_err(err)?;
    ensure!(o12.len() == 2, "{} orbits for the first Gram", o12.len());
    let i = a15::orbit_index(&g12, &o12, &[a15::a(), a15::b(), a15::c()]).map_err(err)?;
    let j = a15::orbit_index(&g12, &o12, &[a15::a(), a15::b(), a15::c1()]).map_err(err)?;
    ensure!(i.is_some() && j.is_some() && i != j, "<a,b,c> and <a,b,c'> not separated");
    let g11 = a15::gram_11();
    let o11 = a15::classify_norm3_triples(&g11).map_err(err)?;
    ensure!(o11.len() == 2, "{} orbits for the second Gram", o11.len());
    let i = a15::orbit_index(&g11, &o11, &[a15::a(), a15::b(), a15::c2()]).map_err(err)?;
    let j = a15::orbit_index(&g11, &o11, &[a15::a(), a15::b(), a15::c3()]).map_err(err)?;
    ensure!(i.is_some() && j.is_some() && i != j, "<a,b,c''> and <a,b,c'''> not separated");
    Ok("2 orbits each; representatives match the named generators".into())
}

fn complements() -> Outcome {
    let dets = [15, 15, 7, 7];
    let mut got = Vec::new();
    for (nl, d) in named()?.iter().zip(dets) {
        ensure!(nl.n.rank() == 12, "{} rank {}", nl.name, nl.n.rank());
        ensure!(nl.n.determinant() == rat(d), "{} det {}", nl.name, nl.n.determinant());
        got.push(format!("{}={}", nl.name, d));
    }
    Ok(format!("rank 12, dets {}", got.join(" ")))
}

fn coset_data() -> Outcome {
    let named = named()?;
    let census = coset_profile(&named[0].m).map_err(err)?.norm_census();
    let expected = vec![(frac(1, 3), 2), (frac(2, 5), 2), (frac(3, 5), 2), (frac(11, 15), 4), (frac(14, 15), 4)];
    ensure!(census == expected, "coset census {census:?}");
    for nl in &named {
        let m = shortvec::minimum(&dual(&nl.n)).map_err(err)?;
        ensure!(m > rat(1) && m >= frac(16, 15), "{} dual minimum {m}", nl.name);
        ensure!(a15::dual_vectors_lift_to_roots(&nl.n).map_err(err)?, "{} lifting fails", nl.name);
    }
    Ok("coset norms 1/3,2/5,3/5,11/15,14/15 (x2,2,2,4,4); dual minima > 1; lifting holds".into())
}

fn projections() -> Outcome {
    let big = a15::build_a15_plus();
    let named = named()?;
    let row = |den: i64, xs: &[(i64, usize)]| -> Vec<Rational> {
        xs.iter().flat_map(|&(x, k)| std::iter::repeat_n(frac(x, den), k)).collect()
    };
    let n_table: Vec<(usize, Vec<Rational>, Rational)> = vec![
        (1, row(60, &[(27, 1), (-13, 2), (-1, 2), (-9, 3), (11, 7), (-49, 1)]), frac(19, 15)),
        (2, row(10, &[(-3, 1), (7, 1), (-3, 1), (-1, 2), (1, 10), (-9, 1)]), frac(8, 5)),
        (4, row(20, &[(-3, 3), (9, 2), (1, 10), (-19, 1)]), frac(7, 5)),
        (6, row(12, &[(-3, 1), (1, 4), (9, 1), (-3, 2), (1, 7), (-11, 1)]), frac(5, 3)),
        (9, row(1, &[(0, 8), (1, 1), (0, 6), (-1, 1)]), rat(2)),
    ];
    let n1_table: Vec<(usize, Vec<Rational>, Rational)> = vec![
        (1, row(10, &[(7, 1), (-3, 2), (-1, 2), (1, 10), (-9, 1)]), frac(8, 5)),
        (4, row(15, &[(-1, 3), (3, 2), (-3, 2), (2, 8), (-13, 1)]), frac(16, 15)),
        (6, row(12, &[(1, 3), (-3, 2), (9, 1), (-3, 1), (1, 8), (-11, 1)]), frac(5, 3)),
        (8, row(1, &[(0, 7), (1, 1), (0, 7), (-1, 1)]), rat(2)),
    ];
    for (nl, table) in [(&named[0], n_table), (&named[1], n1_table)] {
        for (i, expected, norm) in table {
            let p = a15::project_to_complement(&big, &nl.n, &a15::root(i, 16)).map_err(err)?;
            ensure!(p == expected, "{}: projection of e{i} - e16 is {p:?}", nl.name);
            ensure!(dot(&p, &p) == norm, "{}: norm of projection of e{i} - e16", nl.name);
        }
    }
    Ok("N: 19/15, 8/5, 7/5, 5/3, 2; N': 8/5, 16/15, 5/3, 2; all coordinates exact".into())
}

fn non_two_integrability() -> Outcome {
    let big = a15::build_a15_plus();
    let mut notes = Vec::new();
    for nl in named()? {
        let cert = refute_2_integrability(&big, &nl.m, &nl.support_set).map_err(err)?;
        ensure!(cert.mode == RefutationMode::AllPairsViolate, "{} refutation: {:?}", nl.name, cert.mode);
        let t = Instant::now();
        let d = decide_s_integrable(&nl.n, 2, DecideOptions::default()).map_err(err)?;
        let verdict = match d.outcome {
            Integrability::NotIntegrable => "not integrable",
            Integrability::BudgetExhausted => "budget exhausted",
            Integrability::Integrable { .. } => return Err(format!("{} reported integrable", nl.name)),
        };
        notes.push(format!("{} {} ({} nodes, {:.1}s)", nl.name, verdict, d.nodes, t.elapsed().as_secs_f64()));
    }
    Ok(format!("pair refutation holds for all four; search: {}", notes.join("; ")))
}

/// Sorted non-negative vectors with squared length `n`.
fn sorted_vectors(n: i64, max_part: i64) -> Vec<Vec<i64>> {
    if n == 0 {
        return vec![vec![]];
    }
    (1..=max_part)
        .rev()
        .filter(|x| x * x <= n)
        .flat_map(|x| {
            sorted_vectors(n - x * x, x).into_iter().map(move |mut r| {
                r.insert(0, x);
                r
            })
        })
        .collect()
}

fn ball(k: usize, n: i64) -> Vec<Vec<i64>> {
    if k == 0 {
        return vec![vec![]];
    }
    (-3i64..=3)
        .filter(|x| x * x <= n)
        .flat_map(|x| {
            ball(k - 1, n - x * x).into_iter().map(move |mut r| {
                r.insert(0, x);
                r
            })
        })
        .collect()
}

/// Brute force: `√s` times the Gram `[[a, b], [b, c]]` is realised in some `Z^d`.
fn embeds(a: i64, b: i64, c: i64, s: i64) -> bool {
    sorted_vectors(s * a, s * a)
        .iter()
        .any(|x| ball(x.len(), s * c).iter().any(|y| x.iter().zip(y).map(|(p, q)| p * q).sum::<i64>() == s * b))
}

fn positive_controls() -> Outcome {
    for n in 1..=4 {
        let l = Lattice::standard(n);
        match decide_s_integrable(&l, 2, DecideOptions::default()).map_err(err)?.outcome {
            Integrability::Integrable { certificate } => {
                ensure!(certificate.verify(&l), "Z^{n} certificate rejected");
                let vs = certificate.expanded_vectors().ok_or("certificate does not expand")?;
                let basis = l.basis().ok_or("no basis")?.to_rows();
                ensure!(is_eutactic_star(&vs, &basis, 2).map_err(err)?, "Z^{n} star check");
            }
            o => return Err(format!("Z^{n}: {o:?}")),
        }
    }
    let two = Lattice::abstract_gram(SymMatrix::from_i64_rows(&[vec![2]]).map_err(err)?).map_err(err)?;
    ensure!(
        matches!(
            decide_s_integrable(&two, 2, DecideOptions::default()).map_err(err)?.outcome,
            Integrability::Integrable { .. }
        ),
        "[[2]] not integrable"
    );
    let mut checked = 0;
    for s in 1..=2 {
        for a in 1..=4i64 {
            let g = SymMatrix::from_i64_rows(&[vec![a]]).map_err(err)?;
            let d = decide_s_integrable(&Lattice::abstract_gram(g).map_err(err)?, s as u64, DecideOptions::default())
                .map_err(err)?;
            ensure!(matches!(d.outcome, Integrability::Integrable { .. }), "[[{a}]] s={s}");
            checked += 1;
            for c in 1..=4i64 {
                for b in -4..=4i64 {
                    if a * c - b * b <= 0 {
                        continue;
                    }
                    let g = SymMatrix::from_i64_rows(&[vec![a, b], vec![b, c]]).map_err(err)?;
                    let l = Lattice::abstract_gram(g).map_err(err)?;
                    let d = decide_s_integrable(&l, s as u64, DecideOptions::default()).map_err(err)?;
                    let got = match d.outcome {
                        Integrability::Integrable { certificate } => {
                            ensure!(certificate.verify(&l), "bad certificate [[{a},{b}],[{b},{c}]]");
                            true
                        }
                        Integrability::NotIntegrable => false,
                        Integrability::BudgetExhausted => return Err("budget exhausted on rank 2".into()),
                    };
                    ensure!(got == embeds(a, b, c, s), "[[{a},{b}],[{b},{c}]] s={s}: decided {got}");
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("Z^1..Z^4 and [[2]] integrable at s=2; {checked} rank<=2 Grams agree with brute force"))
}

fn kissing() -> Outcome {
    let named = named()?;
    let k0 = shortvec::kissing_number(&named[0].n).map_err(err)?;
    let k1 = shortvec::kissing_number(&named[1].n).map_err(err)?;
    ensure!(k0 == 64 && k1 == 80, "kissing numbers {k0}, {k1}");
    Ok("64 vs 80, so N and N' are non-isometric".into())
}

fn minimality() -> Outcome {
    let witness: Vec<Vec<Rational>> = (9..16).map(|i| a15::root(i, i + 1)).collect();
    for nl in &named()?[..2] {
        let m = a15::check_minimality(&nl.n).map_err(err)?;
        ensure!(m.holds, "{} not minimal", nl.name);
        let span = Lattice::from_generators(&Matrix::from_rows(m.witness.clone()).map_err(err)?).map_err(err)?;
        ensure!(witness.iter().all(|r| span.contains(r)), "{} witness misses a root", nl.name);
    }
    let z = a15::check_minimality(&Lattice::standard(12)).map_err(err)?;
    ensure!(!z.holds && z.dual_minimum == rat(1), "Z^12 reported minimal");
    Ok("N and N' minimal with the rank-7 root witness; Z^12 not".into())
}

fn sum_of_squares(k: i64, m: usize) -> bool {
    if m == 0 {
        return k == 0;
    }
    (0..).take_while(|x| x * x <= k).any(|x| sum_of_squares(k - x * x, m - 1))
}

fn places(values: &[Rational]) -> Vec<Place> {
    let mut out: Vec<Place> = Vec::new();
    for v in values {
        for p in relevant_places(v) {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

fn embedding_theory() -> Outcome {
    let ex = rank12_exception_determinants();
    ensure!(ex == vec![7, 15, 18, 23, 25], "exceptions {ex:?}");
    for k in 1..=50 {
        for m in 1..=3 {
            let g = SymMatrix::from_i64_rows(&[vec![k]]).map_err(err)?;
            let v = embed_unimodular_feasible(&g, m).map_err(err)?;
            ensure!(v.feasible == sum_of_squares(k, m), "[[{k}]] in rank {m}");
        }
    }
    let mut rng = StdRng::seed_from_u64(0xacce97);
    let random_rational = |rng: &mut StdRng| {
        let n: i64 = loop {
            let n = rng.gen_range(-60..=60);
            if n != 0 {
                break n;
            }
        };
        frac(n, rng.gen_range(1..12))
    };
    for _ in 0..1000 {
        let (a, b) = (random_rational(&mut rng), random_rational(&mut rng));
        let prod: i32 =
            places(&[a.clone(), b.clone()]).into_iter().map(|p| hilbert_symbol(&a, &b, p).unwrap()).product();
        ensure!(prod == 1, "Hilbert product formula fails for {a}, {b}");
        let len = rng.gen_range(1..5);
        let d: Vec<Rational> = (0..len).map(|_| random_rational(&mut rng)).collect();
        let prod: i32 = places(&d).into_iter().map(|p| hasse_of_diagonal(&d, p).unwrap()).product();
        ensure!(prod == 1, "Hasse product formula fails for {d:?}");
    }
    let mut round_trips = 0;
    for (p, reps) in [(2u64, vec![1, 3, 5, 7, 2, 6, 10, 14]), (3, vec![1, 2, 3, 6]), (5, vec![1, 2, 5, 10])] {
        let place = Place::Prime(p);
        for n in 1..=6 {
            for &a in &reps {
                for hasse in [1, -1] {
                    let class = square_class(&rat(a), place).map_err(err)?;
                    if let Ok(g) = maximal_rep_gram(p, n, &class, hasse) {
                        let inv = LocalInvariant { place, dim: n, det_class: class, hasse };
                        ensure!(qp_space_exists(&inv), "table entry for impossible invariant");
                        let got = diagonal_invariant(&g, p).map_err(err)?;
                        ensure!((got.dim, &got.det_class, got.hasse) == (n, &class, hasse), "p={p} n={n} a={a}");
                        round_trips += 1;
                    } else {
                        ensure!(n <= 3, "missing table entry p={p} n={n} a={a} hasse={hasse}");
                    }
                }
            }
        }
    }
    Ok(format!(
        "exceptions 7,15,18,23,25; sums of squares agree; 1000+1000 product formulas; {round_trips} table round-trips"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("A15+ structure", structure),
        ("classification of norm-3 triples", classification),
        ("complement ranks and determinants", complements),
        ("coset norms, dual minima, lifting", coset_data),
        ("projection tables", projections),
        ("non 2-integrability", non_two_integrability),
        ("positive controls", positive_controls),
        ("kissing numbers", kissing),
        ("minimality", minimality),
        ("embedding theory", embedding_theory),
    ];
    // keep panics from interleaving with the report
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or(e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
