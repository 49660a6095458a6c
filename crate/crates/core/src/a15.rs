//! The root lattice `A_n`, its unimodular overlattice `A15+`, and the
//! rank-12 complements of norm-3 triples inside it.
//!
//! Coordinates are 1-based in all public set-valued data (`I ⊆ {1..16}`),
//! matching the usual labelling `e_1, …, e_16`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{LatticeError, Result};
use crate::eutactic::projector;
use crate::lattice::{dual, orthogonal_complement, Lattice};
use crate::par;
use crate::ratmat::{dot, frac, is_positive_definite, rat, serde_rational, Matrix, Rational, SymMatrix};
use crate::shortvec;

pub const DIM: usize = 16;

/// `A_n ⊂ Z^{n+1}` with basis `e_i - e_{i+1}`.
pub fn build_an(n: usize) -> Result<Lattice> {
    if n == 0 || n > DIM {
        return Err(LatticeError::Invalid(format!("A_n needs 1 <= n <= {DIM}, got {n}")));
    }
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut r = vec![0; n + 1];
            r[i] = 1;
            r[i + 1] = -1;
            r
        })
        .collect();
    Lattice::from_basis(Matrix::from_i64_rows(&rows)?)
}

/// `t_I = e/4 - Σ_{i∈I} e_i` for a 4-subset `I` of `{1..16}`.
pub fn t_vector(support: &[usize]) -> Vec<Rational> {
    let mut v = vec![frac(1, 4); DIM];
    for &i in support {
        v[i - 1] -= rat(1);
    }
    v
}

/// `A15` together with the glue vector `[4] = t_{13,14,15,16}`.
pub fn build_a15_plus() -> Lattice {
    let a15 = build_an(15).expect("valid rank");
    let mut rows = a15.basis().expect("coordinates").to_rows();
    rows.push(t_vector(&[13, 14, 15, 16]));
    Lattice::from_generators(&Matrix::from_rows(rows).expect("rectangular")).expect("spans")
}

/// `e_i - e_j` in `R^16`, 1-based.
pub fn root(i: usize, j: usize) -> Vec<Rational> {
    let mut v = vec![rat(0); DIM];
    v[i - 1] += rat(1);
    v[j - 1] -= rat(1);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Mask(u16);

impl Mask {
    fn of(s: &[usize]) -> Self {
        Mask(s.iter().fold(0, |m, &i| m | 1 << (i - 1)))
    }
    fn elements(self) -> Vec<usize> {
        (1..=DIM).filter(|&i| self.0 >> (i - 1) & 1 == 1).collect()
    }
    fn meet(self, o: Mask) -> i64 {
        (self.0 & o.0).count_ones() as i64
    }
}

fn four_subsets() -> Vec<Mask> {
    (0u32..1 << DIM).filter(|m| m.count_ones() == 4).map(|m| Mask(m as u16)).collect()
}

/// `±t_I`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NormThreeVector {
    pub sign: i8,
    pub support: Vec<usize>,
}

impl NormThreeVector {
    pub fn new(sign: i8, support: &[usize]) -> Self {
        let mut s = support.to_vec();
        s.sort_unstable();
        NormThreeVector { sign, support: s }
    }

    pub fn to_vector(&self) -> Vec<Rational> {
        let v = t_vector(&self.support);
        if self.sign < 0 {
            v.into_iter().map(|x| -x).collect()
        } else {
            v
        }
    }

    /// Recognises `±t_I` among ambient vectors.
    pub fn from_vector(v: &[Rational]) -> Option<Self> {
        if v.len() != DIM {
            return None;
        }
        for sign in [1i8, -1] {
            let s = rat(sign as i64);
            let sup: Vec<usize> = (1..=DIM).filter(|&i| v[i - 1].clone() * &s == frac(-3, 4)).collect();
            let rest = (1..=DIM).filter(|i| !sup.contains(i)).all(|i| v[i - 1].clone() * &s == frac(1, 4));
            if sup.len() == 4 && rest {
                return Some(NormThreeVector::new(sign, &sup));
            }
        }
        None
    }

    fn mask(&self) -> Mask {
        Mask::of(&self.support)
    }
}

fn pairing(x: (i8, Mask), y: (i8, Mask)) -> i64 {
    (x.0 as i64) * (y.0 as i64) * (-1 + x.1.meet(y.1))
}

/// Venn region sizes of three subsets, indexed by membership bits.
fn regions(s: [Mask; 3]) -> [u8; 8] {
    let mut r = [0u8; 8];
    for i in 0..DIM {
        let bit = |m: Mask| (m.0 >> i & 1) as usize;
        r[bit(s[0]) | bit(s[1]) << 1 | bit(s[2]) << 2] += 1;
    }
    r
}

type Triple = [(i8, Mask); 3];

/// Signed permutations `(σ, η)` with `η_i η_j g_{σi σj} = g_ij`.
fn gram_symmetries(g: &[[i64; 3]; 3]) -> Vec<([usize; 3], [i8; 3])> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::new();
    for p in PERMS {
        for bits in 0..8u8 {
            let eta = [0, 1, 2].map(|i| if bits >> i & 1 == 1 { -1i8 } else { 1 });
            let ok = (0..3).all(|i| (0..3).all(|j| (eta[i] as i64) * (eta[j] as i64) * g[p[i]][p[j]] == g[i][j]));
            if ok {
                out.push((p, eta));
            }
        }
    }
    out
}

fn apply(t: &Triple, (p, eta): &([usize; 3], [i8; 3])) -> Triple {
    [0, 1, 2].map(|i| (t[p[i]].0 * eta[i], t[p[i]].1))
}

/// Complete `S16`-invariant of an ordered signed triple: since `S16` acts as
/// the full symmetric group on the ground set, ordered set triples are
/// equivalent exactly when their Venn region sizes agree.
type Key = ([i8; 3], [u8; 8]);

fn key(t: &Triple) -> Key {
    ([t[0].0, t[1].0, t[2].0], regions([t[0].1, t[1].1, t[2].1]))
}

fn canonical(t: &Triple, syms: &[([usize; 3], [i8; 3])]) -> Key {
    syms.iter().map(|s| key(&apply(t, s))).min().expect("identity is a symmetry")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TripleOrbit {
    pub representative: [NormThreeVector; 3],
    /// `|I∩J|, |I∩K|, |J∩K|`.
    pub pairwise: [usize; 3],
    pub triple_intersection: usize,
    /// Venn region sizes indexed by membership bits (bit 0: `I`, 1: `J`, 2: `K`).
    pub regions: [u8; 8],
    /// Enumerated triples with first vector `t_{1,2,3,4}` in this orbit.
    pub triples: usize,
}

fn orbit_from(t: &Triple, triples: usize) -> TripleOrbit {
    let v = t.map(|(s, m)| NormThreeVector::new(s, &m.elements()));
    TripleOrbit {
        representative: v,
        pairwise: [t[0].1.meet(t[1].1) as usize, t[0].1.meet(t[2].1) as usize, t[1].1.meet(t[2].1) as usize],
        triple_intersection: (t[0].1 .0 & t[1].1 .0 & t[2].1 .0).count_ones() as usize,
        regions: regions([t[0].1, t[1].1, t[2].1]),
        triples,
    }
}

fn check_target(target: &SymMatrix) -> Result<[[i64; 3]; 3]> {
    if target.dim() != 3 {
        return Err(LatticeError::Invalid("target must be 3x3".into()));
    }
    if !target.is_integral() {
        return Err(LatticeError::NotIntegral);
    }
    if !is_positive_definite(target) {
        return Err(LatticeError::NotPositiveDefinite);
    }
    let rows = target.to_rows();
    let mut g = [[0i64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let x = &rows[i][j];
            if x.abs() > rat(3) {
                return Err(LatticeError::Invalid(format!("entry {x} is not an inner product of norm-3 vectors")));
            }
            g[i][j] = x.to_integer().try_into().expect("small");
        }
        if g[i][i] != 3 {
            return Err(LatticeError::Invalid("diagonal entries must be 3".into()));
        }
    }
    Ok(g)
}

/// All signed triples `(t_{1,2,3,4}, ±t_J, ±t_K)` with the target Gram.
/// Every triple in `A15+` is equivalent under `<S16, -1>` to one of these.
fn enumerate_triples(g: &[[i64; 3]; 3]) -> Vec<Triple> {
    let subsets = four_subsets();
    let x = (1i8, Mask::of(&[1, 2, 3, 4]));
    let ys: Vec<(i8, Mask)> =
        subsets.iter().flat_map(|&m| [(1i8, m), (-1, m)]).filter(|&y| pairing(x, y) == g[0][1]).collect();
    let per_y: Vec<Vec<Triple>> = par::map(&ys, |&y| {
        subsets
            .iter()
            .flat_map(|&m| [(1i8, m), (-1, m)])
            .filter(|&z| pairing(x, z) == g[0][2] && pairing(y, z) == g[1][2])
            .map(|z| [x, y, z])
            .collect()
    });
    per_y.into_iter().flatten().collect()
}

/// Orbits of norm-3 triples of `A15+` with the given Gram matrix under
/// `Aut(A15+) = <S16, -1>`, identified up to Gram-preserving signed
/// reorderings (so each orbit is one class of generated sublattices).
pub fn classify_norm3_triples(target: &SymMatrix) -> Result<Vec<TripleOrbit>> {
    let g = check_target(target)?;
    let syms = gram_symmetries(&g);
    let mut classes: BTreeMap<Key, (Triple, usize)> = BTreeMap::new();
    for t in enumerate_triples(&g) {
        classes.entry(canonical(&t, &syms)).or_insert((t, 0)).1 += 1;
    }
    Ok(classes.values().map(|(t, n)| orbit_from(t, *n)).collect())
}

/// Index into `orbits` of the class containing the triple `v`.
pub fn orbit_index(target: &SymMatrix, orbits: &[TripleOrbit], v: &[NormThreeVector; 3]) -> Result<Option<usize>> {
    let g = check_target(target)?;
    let syms = gram_symmetries(&g);
    let as_triple = |w: &[NormThreeVector; 3]| -> Triple { [0, 1, 2].map(|i| (w[i].sign, w[i].mask())) };
    let t = as_triple(v);
    for i in 0..3 {
        for j in 0..3 {
            if pairing(t[i], t[j]) != g[i][j] {
                return Err(LatticeError::Invalid("triple does not have the target Gram".into()));
            }
        }
    }
    let k = canonical(&t, &syms);
    Ok(orbits.iter().position(|o| canonical(&as_triple(&o.representative), &syms) == k))
}

/// Independent orbit count: union-find over the enumerated triples, joined
/// along random elements of `S16 × {Gram symmetries}` and renormalised so
/// the first vector is `t_{1,2,3,4}` again.
pub fn sampled_orbit_count(target: &SymMatrix, samples_per_triple: usize, seed: u64) -> Result<usize> {
    let g = check_target(target)?;
    let syms = gram_symmetries(&g);
    let triples = enumerate_triples(&g);
    let index: HashMap<Triple, usize> = triples.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let mut parent: Vec<usize> = (0..triples.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut state = seed | 1;
    let mut next = move || {
        // xorshift64*
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        state.wrapping_mul(0x2545_f491_4f6c_dd1d)
    };
    let permute =
        |m: Mask, pi: &[usize; DIM]| Mask((0..DIM).filter(|&i| m.0 >> i & 1 == 1).fold(0, |a, i| a | 1 << pi[i]));
    for (i, t) in triples.iter().enumerate() {
        for _ in 0..samples_per_triple {
            let mut pi: [usize; DIM] = std::array::from_fn(|k| k);
            for k in (1..DIM).rev() {
                pi.swap(k, (next() % (k as u64 + 1)) as usize);
            }
            let s = &syms[(next() % syms.len() as u64) as usize];
            let mut u = apply(&t.map(|(e, m)| (e, permute(m, &pi))), s);
            if u[0].0 < 0 {
                u = u.map(|(e, m)| (-e, m));
            }
            // order-preserving relabelling sending the first support to {1,2,3,4}
            let mut back = [0usize; DIM];
            let (inside, outside): (Vec<usize>, Vec<usize>) = (0..DIM).partition(|&k| u[0].1 .0 >> k & 1 == 1);
            for (pos, k) in inside.into_iter().chain(outside).enumerate() {
                back[k] = pos;
            }
            let u = u.map(|(e, m)| (e, permute(m, &back)));
            let j = *index.get(&u).expect("images stay in the enumeration");
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    Ok((0..triples.len()).filter(|&i| find(&mut parent, i) == i).count())
}

/// The generators used for the named complements, in `A15+`.
pub fn a() -> NormThreeVector {
    NormThreeVector::new(1, &[1, 2, 3, 4])
}
pub fn b() -> NormThreeVector {
    NormThreeVector::new(1, &[1, 2, 3, 5])
}
pub fn c() -> NormThreeVector {
    NormThreeVector::new(1, &[1, 6, 7, 8])
}
pub fn c1() -> NormThreeVector {
    NormThreeVector::new(1, &[4, 5, 6, 7])
}
pub fn c2() -> NormThreeVector {
    NormThreeVector::new(1, &[1, 2, 4, 5])
}
pub fn c3() -> NormThreeVector {
    NormThreeVector::new(1, &[1, 2, 3, 6])
}

pub fn gram_12() -> SymMatrix {
    SymMatrix::from_i64_rows(&[vec![3, 2, 0], vec![2, 3, 0], vec![0, 0, 3]]).expect("symmetric")
}

pub fn gram_11() -> SymMatrix {
    SymMatrix::from_i64_rows(&[vec![3, 2, 2], vec![2, 3, 2], vec![2, 2, 3]]).expect("symmetric")
}

#[derive(Clone, Debug)]
pub struct NamedLattice {
    pub name: &'static str,
    pub generators: [NormThreeVector; 3],
    /// `⟨generators⟩`.
    pub m: Lattice,
    /// `m^⊥` in `A15+`.
    pub n: Lattice,
    /// Support set for the pair refutation, 1-based.
    pub support_set: Vec<usize>,
    /// Coordinate blocks grouping roots by projection behaviour, if tabulated.
    pub partition: Option<Vec<Vec<usize>>>,
    /// Coordinate blocks whose roots make up `n ∩ R`, if tabulated.
    pub root_blocks: Option<Vec<Vec<usize>>>,
}

fn range(a: usize, b: usize) -> Vec<usize> {
    (a..=b).collect()
}

/// `N, N', N'', N'''`: complements of `<a,b,c>`, `<a,b,c'>`, `<a,b,c''>`,
/// `<a,b,c'''>` in `A15+`.
pub fn named_lattices() -> Result<Vec<NamedLattice>> {
    let big = build_a15_plus();
    let specs: [(&'static str, NormThreeVector, usize, Option<Vec<Vec<usize>>>, Option<Vec<Vec<usize>>>); 4] = [
        (
            "N",
            c(),
            9,
            Some(vec![vec![1], vec![2, 3], vec![4, 5], vec![6, 7, 8], range(9, 16)]),
            Some(vec![vec![1], vec![2, 3], vec![4], vec![5], vec![6, 7, 8], range(9, 16)]),
        ),
        (
            "N'",
            c1(),
            8,
            Some(vec![vec![1, 2, 3], vec![4, 5], vec![6, 7], range(8, 16)]),
            Some(vec![vec![1, 2, 3], vec![4], vec![5], vec![6, 7], range(8, 16)]),
        ),
        ("N''", c2(), 6, None, None),
        ("N'''", c3(), 7, None, None),
    ];
    specs
        .into_iter()
        .map(|(name, third, from, partition, root_blocks)| {
            let generators = [a(), b(), third];
            let rows: Vec<Vec<Rational>> = generators.iter().map(NormThreeVector::to_vector).collect();
            let m = Lattice::from_generators(&Matrix::from_rows(rows)?)?;
            let n = orthogonal_complement(&big, &m)?;
            Ok(NamedLattice { name, generators, m, n, support_set: range(from, 16), partition, root_blocks })
        })
        .collect()
}

/// Orthogonal projection of `v ∈ big` onto the span of `n`.
pub fn project_to_complement(big: &Lattice, n: &Lattice, v: &[Rational]) -> Result<Vec<Rational>> {
    if big.ambient_dim() != Some(v.len()) {
        return Err(LatticeError::DimensionMismatch(format!("vector of length {}", v.len())));
    }
    if !big.contains(v) {
        return Err(LatticeError::NotInLattice);
    }
    Ok(projector(n)?(v))
}

/// Roots `e_i - e_j` with `i, j` in a common block.
pub fn roots_in_blocks(blocks: &[Vec<usize>]) -> BTreeSet<Vec<Rational>> {
    let mut out = BTreeSet::new();
    for blk in blocks {
        for &i in blk {
            for &j in blk {
                if i != j {
                    out.insert(root(i, j));
                }
            }
        }
    }
    out
}

/// Block indices (1-based) met by the support of `u`, of `v`, and of both.
pub fn pair_types(
    partition: &[Vec<usize>],
    u: &[Rational],
    v: &[Rational],
) -> (BTreeSet<usize>, BTreeSet<usize>, BTreeSet<usize>) {
    let supp = |w: &[Rational]| -> BTreeSet<usize> { (1..=w.len()).filter(|&i| !w[i - 1].is_zero()).collect() };
    let (su, sv) = (supp(u), supp(v));
    let common: BTreeSet<usize> = su.intersection(&sv).copied().collect();
    let ty = |s: &BTreeSet<usize>| -> BTreeSet<usize> {
        partition.iter().enumerate().filter(|(_, blk)| blk.iter().any(|i| s.contains(i))).map(|(k, _)| k + 1).collect()
    };
    (ty(&su), ty(&sv), ty(&common))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Minimality {
    pub holds: bool,
    #[serde(with = "serde_rational")]
    pub dual_minimum: Rational,
    /// Norm bound of the generators used for the witness.
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub generator_norm: Option<Rational>,
    pub witness_rank: usize,
    /// Generators of a connected (hence irreducible) sublattice of maximal rank.
    #[serde(skip)]
    pub witness: Vec<Vec<Rational>>,
}

mod opt_rational {
    use super::*;
    pub fn serialize<S: serde::Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match q {
            Some(q) => serde_rational::serialize(q, s),
            None => s.serialize_none(),
        }
    }
}

/// Components of the non-orthogonality graph, largest span rank first.
fn components(vs: &[Vec<Rational>]) -> Vec<Vec<usize>> {
    let n = vs.len();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![s];
        let mut comp = Vec::new();
        while let Some(i) = stack.pop() {
            comp.push(i);
            for j in 0..n {
                if !seen[j] && !dot(&vs[i], &vs[j]).is_zero() {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

fn span_rank(vs: &[Vec<Rational>]) -> usize {
    Matrix::from_rows(vs.to_vec()).map(|m| m.rank()).unwrap_or(0)
}

/// Sufficient test for minimal non 1-integrability: the dual minimum exceeds
/// 1, and some irreducible sublattice of rank at least `rank - 5` is
/// generated by vectors of norm at most 3.
///
/// Irreducibility is certified by connectivity of the generators under
/// non-orthogonality; this is sound here because a decomposition of the
/// generated lattice would have to split every generator of norm below 4
/// when the ambient minimum is at least 2.
pub fn check_minimality(n: &Lattice) -> Result<Minimality> {
    if n.basis().is_none() {
        return Err(LatticeError::NoCoordinates);
    }
    let dual_minimum = shortvec::minimum(&dual(n))?;
    let mut out = Minimality { holds: false, dual_minimum, generator_norm: None, witness_rank: 0, witness: Vec::new() };
    if out.dual_minimum <= rat(1) {
        return Ok(out);
    }
    let target = n.rank().saturating_sub(5);
    let short = shortvec::vectors_up_to(n, &rat(3))?;
    for bound in [rat(2), rat(3)] {
        let vs: Vec<Vec<Rational>> =
            short.vectors.iter().filter(|v| v.norm <= bound).map(|v| v.vector.clone().expect("coordinates")).collect();
        for comp in components(&vs) {
            let gens: Vec<Vec<Rational>> = comp.iter().map(|&i| vs[i].clone()).collect();
            let r = span_rank(&gens);
            if r > out.witness_rank {
                out.witness_rank = r;
                out.witness = gens;
                out.generator_norm = Some(bound.clone());
            }
        }
        if out.witness_rank >= target {
            out.holds = true;
            return Ok(out);
        }
    }
    Ok(out)
}

/// `ρ(e_i - e_16)` for the first coordinate `i` of each block before the last.
pub fn projection_table(named: &NamedLattice) -> Result<Vec<(usize, Vec<Rational>, Rational)>> {
    let big = build_a15_plus();
    let partition = named.partition.as_ref().ok_or_else(|| LatticeError::Invalid("no partition".into()))?;
    let mut out = Vec::new();
    for blk in partition {
        let i = blk[0];
        let v = if i == 16 { root(15, 16) } else { root(i, 16) };
        let p = project_to_complement(&big, &named.n, &v)?;
        let norm = dot(&p, &p);
        out.push((i, p, norm));
    }
    Ok(out)
}

/// Vectors of norm 2 and 3 in `A15+`, and whether the norm-3 ones are all of
/// the form `±t_I`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Census {
    pub norm2: usize,
    pub norm3: usize,
    pub norm3_all_t: bool,
}

pub fn census() -> Result<Census> {
    let l = build_a15_plus();
    let vs = shortvec::vectors_up_to(&l, &rat(3))?;
    let (two, three) = (rat(2), rat(3));
    let norm3: Vec<_> = vs.with_norm(&three).collect();
    Ok(Census {
        norm2: vs.with_norm(&two).count(),
        norm3: norm3.len(),
        norm3_all_t: norm3.iter().all(|v| v.vector.as_deref().and_then(NormThreeVector::from_vector).is_some()),
    })
}

/// Whether every nonzero vector of `n*` of norm at most 2 is the projection
/// of a root of `A15+`.
pub fn dual_vectors_lift_to_roots(n: &Lattice) -> Result<bool> {
    let big = build_a15_plus();
    let rho = projector(n)?;
    let images: BTreeSet<Vec<Rational>> = par::map(&crate::eutactic::roots(&big)?, |r| rho(r)).into_iter().collect();
    Ok(shortvec::vectors_up_to(&dual(n), &rat(2))?
        .vectors
        .iter()
        .all(|w| w.vector.as_ref().is_some_and(|v| images.contains(v))))
}

/// Roots of `A15+` lying in `n`.
pub fn roots_in(n: &Lattice) -> Result<BTreeSet<Vec<Rational>>> {
    Ok(crate::eutactic::roots(&build_a15_plus())?.into_iter().filter(|r| n.contains(r)).collect())
}
