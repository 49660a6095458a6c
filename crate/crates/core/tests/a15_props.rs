#![allow(clippy::type_complexity)]

use std::collections::{BTreeMap, BTreeSet};

use latint::a15::*;
use latint::eutactic::{projector, roots};
use latint::lattice::{coset_profile, orthogonal_complement, Lattice, Parity};
use latint::ratmat::{dot, frac, rat, Matrix, Rational, SymMatrix};
use latint::shortvec;
use num_traits::Signed;

fn named(name: &str) -> NamedLattice {
    named_lattices().unwrap().into_iter().find(|n| n.name == name).unwrap()
}

#[test]
fn overlattice_census() {
    let l = build_a15_plus();
    assert_eq!(l.parity().unwrap(), Parity::Odd);
    assert_eq!(shortvec::minimum(&l).unwrap(), rat(2));
    let c = census().unwrap();
    assert_eq!((c.norm2, c.norm3, c.norm3_all_t), (240, 3640, true));
    // the roots are exactly e_i - e_j
    let r: BTreeSet<Vec<Rational>> = roots(&l).unwrap().into_iter().collect();
    let expected: BTreeSet<Vec<Rational>> =
        (1..=16).flat_map(|i| (1..=16).filter(move |&j| j != i).map(move |j| root(i, j))).collect();
    assert_eq!(r, expected);
}

#[test]
fn classification_of_target_grams() {
    let g12 = gram_12();
    let orbits = classify_norm3_triples(&g12).unwrap();
    assert_eq!(orbits.len(), 2);
    let i = orbit_index(&g12, &orbits, &[a(), b(), c()]).unwrap().unwrap();
    let j = orbit_index(&g12, &orbits, &[a(), b(), c1()]).unwrap().unwrap();
    assert_ne!(i, j);
    assert_eq!(orbits[i].triple_intersection, 1);
    assert_eq!(orbits[j].triple_intersection, 0);

    let g11 = gram_11();
    let orbits = classify_norm3_triples(&g11).unwrap();
    assert_eq!(orbits.len(), 2);
    let i = orbit_index(&g11, &orbits, &[a(), b(), c2()]).unwrap().unwrap();
    let j = orbit_index(&g11, &orbits, &[a(), b(), c3()]).unwrap().unwrap();
    assert_ne!(i, j);
}

#[test]
fn classification_matches_sampled_orbits() {
    let diag = SymMatrix::from_i64_rows(&[vec![3, 0, 0], vec![0, 3, 0], vec![0, 0, 3]]).unwrap();
    for g in [gram_12(), gram_11(), diag] {
        let exact = classify_norm3_triples(&g).unwrap().len();
        assert_eq!(sampled_orbit_count(&g, 4, 0x5eed).unwrap(), exact, "{g:?}");
    }
}

#[test]
fn relabelled_triples_land_in_the_same_orbit() {
    let g = gram_12();
    let orbits = classify_norm3_triples(&g).unwrap();
    let relabel = |v: &NormThreeVector| {
        let sup: Vec<usize> = v.support.iter().map(|&i| 17 - i).collect();
        NormThreeVector::new(-v.sign, &sup)
    };
    for t in [[a(), b(), c()], [a(), b(), c1()]] {
        let moved = [relabel(&t[0]), relabel(&t[1]), relabel(&t[2])];
        assert_eq!(orbit_index(&g, &orbits, &t).unwrap(), orbit_index(&g, &orbits, &moved).unwrap());
        // swapping the first two generators preserves the Gram
        let swapped = [t[1].clone(), t[0].clone(), t[2].clone()];
        assert_eq!(orbit_index(&g, &orbits, &t).unwrap(), orbit_index(&g, &orbits, &swapped).unwrap());
    }
}

#[test]
fn representatives_have_only_their_own_norm_three_vectors() {
    // so classes of triples and classes of generated lattices coincide
    for g in [gram_12(), gram_11()] {
        for o in classify_norm3_triples(&g).unwrap() {
            let rows: Vec<Vec<Rational>> = o.representative.iter().map(NormThreeVector::to_vector).collect();
            let m = Lattice::from_generators(&Matrix::from_rows(rows).unwrap()).unwrap();
            assert_eq!(m.gram().determinant(), g.determinant());
            let n3 = shortvec::vectors_up_to(&m, &rat(3)).unwrap();
            assert_eq!(n3.with_norm(&rat(3)).count(), 6);
        }
    }
}

#[test]
fn complements() {
    let expected = [("N", 15), ("N'", 15), ("N''", 7), ("N'''", 7)];
    for (nl, (name, det)) in named_lattices().unwrap().iter().zip(expected) {
        assert_eq!(nl.name, name);
        assert_eq!(nl.n.rank(), 12);
        assert_eq!(nl.n.determinant(), rat(det));
        assert_eq!(nl.m.determinant(), rat(det));
    }
}

#[test]
fn coset_norms_of_generated_lattice() {
    let n = named("N");
    let profile = coset_profile(&n.m).unwrap();
    assert_eq!(profile.coset_count, 15);
    let census: BTreeMap<Rational, usize> = profile.norm_census().into_iter().collect();
    let expected: BTreeMap<Rational, usize> =
        [(frac(1, 3), 2), (frac(2, 5), 2), (frac(3, 5), 2), (frac(11, 15), 4), (frac(14, 15), 4)].into_iter().collect();
    assert_eq!(census, expected);
}

#[test]
fn dual_minima_and_lifting() {
    let mins = [frac(16, 15), frac(16, 15), frac(8, 7), frac(8, 7)];
    for (nl, m) in named_lattices().unwrap().iter().zip(mins) {
        let got = shortvec::minimum(&latint::lattice::dual(&nl.n)).unwrap();
        assert_eq!(got, m, "{}", nl.name);
        assert!(dual_vectors_lift_to_roots(&nl.n).unwrap(), "{}", nl.name);
    }
}

#[test]
fn roots_split_by_blocks() {
    for name in ["N", "N'"] {
        let nl = named(name);
        let blocks = nl.root_blocks.clone().unwrap();
        assert_eq!(roots_in(&nl.n).unwrap(), roots_in_blocks(&blocks), "{name}");
    }
    assert_eq!(shortvec::kissing_number(&named("N").n).unwrap(), 64);
    assert_eq!(shortvec::kissing_number(&named("N'").n).unwrap(), 80);
}

#[test]
fn projection_depends_only_on_types() {
    let nl = named("N");
    let pi = nl.partition.clone().unwrap();
    let big = build_a15_plus();
    let rho = projector(&nl.n).unwrap();
    let r = roots(&big).unwrap();
    let p: Vec<Vec<Rational>> = r.iter().map(|v| rho(v)).collect();
    let mut seen: BTreeMap<(bool, Vec<usize>, Vec<usize>, Vec<usize>), BTreeSet<Rational>> = BTreeMap::new();
    for i in 0..r.len() {
        for j in 0..r.len() {
            let (tu, tv, tuv) = pair_types(&pi, &r[i], &r[j]);
            let strong = dot(&r[i], &r[j]).abs() == rat(2);
            let key = (
                strong,
                tu.into_iter().collect(),
                tv.into_iter().collect(),
                if strong { vec![] } else { tuv.into_iter().collect() },
            );
            seen.entry(key).or_default().insert(dot(&p[i], &p[j]).abs());
        }
    }
    for (k, vals) in &seen {
        assert_eq!(vals.len(), 1, "{k:?} -> {vals:?}");
    }
}

#[test]
fn projections() {
    let big = build_a15_plus();
    let n = named("N");
    let p = project_to_complement(&big, &n.n, &root(9, 16)).unwrap();
    assert_eq!(p, root(9, 16));
    let p = project_to_complement(&big, &n.n, &root(1, 16)).unwrap();
    assert_eq!(dot(&p, &p), frac(19, 15));
    let n1 = named("N'");
    let p = project_to_complement(&big, &n1.n, &root(4, 16)).unwrap();
    assert_eq!(dot(&p, &p), frac(16, 15));
    let mut half = root(1, 2);
    half[0] = frac(1, 2);
    assert!(project_to_complement(&big, &n.n, &half).is_err());
    // the projection is idempotent and orthogonal to the generators
    let v = project_to_complement(&big, &n.n, &root(2, 7)).unwrap();
    let rho = projector(&n.n).unwrap();
    assert_eq!(rho(&v), v);
    for g in &n.generators {
        assert_eq!(dot(&v, &g.to_vector()), rat(0));
    }
}

#[test]
fn minimality() {
    let witness_rows: Vec<Vec<Rational>> = (9..16).map(|i| root(i, i + 1)).collect();
    let witness = Lattice::from_basis(Matrix::from_rows(witness_rows).unwrap()).unwrap();
    for name in ["N", "N'"] {
        let m = check_minimality(&named(name).n).unwrap();
        assert!(m.holds, "{name}");
        assert!(m.witness_rank >= 7);
        let span = Lattice::from_generators(&Matrix::from_rows(m.witness.clone()).unwrap()).unwrap();
        for r in witness.basis().unwrap().row_iter() {
            assert!(span.contains(r), "{name}");
        }
    }
    assert_eq!(check_minimality(&named("N").n).unwrap().witness_rank, 7);
    let z = check_minimality(&Lattice::standard(12)).unwrap();
    assert!(!z.holds);
    assert_eq!(z.dual_minimum, rat(1));
}

#[test]
fn complement_of_glue_free_part() {
    // the span of e_9 - e_16, …, e_15 - e_16 is orthogonal to all three generators of N
    let nl = named("N");
    let rows: Vec<Vec<Rational>> = (9..16).map(|i| root(i, 16)).collect();
    let part = Lattice::from_basis(Matrix::from_rows(rows).unwrap()).unwrap();
    let back = orthogonal_complement(&build_a15_plus(), &part).unwrap();
    assert_eq!(back.rank(), 8);
    for g in &nl.generators {
        assert!(back.contains(&g.to_vector()));
    }
}
