use latint::lattice::{self, dual, Lattice, LatticeDocument, Parity};
use latint::ratmat::{self, determinant, is_positive_semidefinite, rat, Matrix, Rational, SymMatrix};
use latint::shortvec::{coefficient_box, vectors_up_to};
use num_traits::Zero;
use proptest::prelude::*;

fn int_rows(n: usize, m: usize, r: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-r..=r, m), n)
}

/// Cofactor expansion, fine for the tiny matrices used here.
fn laplace(m: &[Vec<Rational>]) -> Rational {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut sum = rat(0);
    for j in 0..m.len() {
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = &m[0][j] * laplace(&minor);
        sum = if j % 2 == 0 { sum + term } else { sum - term };
    }
    sum
}

fn full_rank(rows: &[Vec<i64>]) -> Option<Lattice> {
    let b = Matrix::from_i64_rows(rows).ok()?;
    if b.rank() != rows.len() {
        return None;
    }
    Lattice::from_basis(b).ok()
}

#[test]
fn document_round_trip() {
    let text = r#"{"gram": [["2","-1"],["-1","2"]]}"#;
    let l = LatticeDocument::parse(text).unwrap().to_lattice().unwrap();
    assert_eq!(l.determinant(), rat(3));
    let text = r#"{"ambient_dim": 3, "generators": [["1","-1","0"],["0","1","-1"],["1","0","-1"]]}"#;
    let l = LatticeDocument::parse(text).unwrap().to_lattice().unwrap();
    assert_eq!(l.rank(), 2);
    let back = LatticeDocument::from_lattice(&l).to_lattice().unwrap();
    assert!(back.same_lattice(&l));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bareiss_agrees_with_cofactor_expansion(rows in int_rows(4, 4, 9)) {
        let m: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
        let a = Matrix::from_rows(m.clone()).unwrap();
        prop_assert_eq!(a.determinant().unwrap(), laplace(&m));
    }

    #[test]
    fn determinant_of_congruent_gram(rows in int_rows(3, 4, 3), u in int_rows(3, 3, 3)) {
        let g = SymMatrix::gram_of_rows(&Matrix::from_i64_rows(&rows).unwrap());
        let um = Matrix::from_i64_rows(&u).unwrap();
        let du = um.determinant().unwrap();
        prop_assert_eq!(determinant(&g.transform(&um).unwrap()), &du * &du * determinant(&g));
    }

    #[test]
    fn semidefinite_oracle(rows in int_rows(3, 3, 4), shift in -6i64..=6) {
        // Gram matrices are PSD, their negatives only when zero, and a
        // diagonal matrix exactly when its entries are non-negative
        let g = SymMatrix::gram_of_rows(&Matrix::from_i64_rows(&rows).unwrap());
        prop_assert!(is_positive_semidefinite(&g));
        let d = SymMatrix::diagonal(&[rat(shift), rat(1), rat(shift.abs())]);
        prop_assert_eq!(is_positive_semidefinite(&d), shift >= 0);
        let neg = SymMatrix::from_rows(g.to_rows().into_iter().map(|r| r.into_iter().map(|x| -x).collect()).collect()).unwrap();
        prop_assert_eq!(is_positive_semidefinite(&neg), g.to_rows().iter().flatten().all(|x| x.is_zero()));
    }

    #[test]
    fn dual_is_an_involution(rows in int_rows(3, 4, 3)) {
        if let Some(l) = full_rank(&rows) {
            let dd = dual(&dual(&l));
            prop_assert!(dd.same_lattice(&l));
            prop_assert_eq!(dual(&l).determinant() * l.determinant(), rat(1));
            // an integral lattice sits inside its dual with index det
            let idx = lattice::index(&dual(&l), &l).unwrap();
            prop_assert_eq!(Rational::from_integer(idx), l.determinant());
        }
    }

    #[test]
    fn parity_of_direct_sums(a in int_rows(2, 3, 2), b in int_rows(2, 3, 2)) {
        if let (Some(x), Some(y)) = (full_rank(&a), full_rank(&b)) {
            let s = lattice::direct_sum(&x, &y);
            let even = x.parity().unwrap() == Parity::Even && y.parity().unwrap() == Parity::Even;
            prop_assert_eq!(s.parity().unwrap() == Parity::Even, even);
            prop_assert_eq!(s.determinant(), x.determinant() * y.determinant());
        }
    }

    #[test]
    fn shortvec_matches_box_enumeration(rows in int_rows(3, 3, 2), bound in 1i64..=8) {
        if let Some(l) = full_rank(&rows) {
            let bound = rat(bound);
            let got = vectors_up_to(&l, &bound).unwrap();
            let bx = coefficient_box(l.gram(), &bound);
            let mut count = 0;
            for x in -bx[0]..=bx[0] {
                for y in -bx[1]..=bx[1] {
                    for z in -bx[2]..=bx[2] {
                        let c = [rat(x), rat(y), rat(z)];
                        let n = l.gram().bilinear(&c, &c);
                        if !n.is_zero() && n <= bound {
                            count += 1;
                        }
                    }
                }
            }
            prop_assert_eq!(got.len(), count);
            prop_assert!(got.vectors.iter().all(|v| v.norm <= bound));
        }
    }

    #[test]
    fn primitive_closure_contains_and_is_primitive(rows in int_rows(2, 4, 3), k in 1i64..4) {
        if let Some(m) = full_rank(&rows) {
            let l = Lattice::standard(4);
            let scaled = Lattice::from_basis(m.basis().unwrap().scale(&rat(k))).unwrap();
            let p = lattice::primitive_closure(&l, &scaled).unwrap();
            prop_assert!(lattice::is_primitive(&l, &p).unwrap());
            prop_assert!(scaled.basis().unwrap().row_iter().all(|r| p.contains(r)));
            prop_assert_eq!(ratmat::is_integer(&p.determinant()), true);
        }
    }
}
