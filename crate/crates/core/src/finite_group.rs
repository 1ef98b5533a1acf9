//! Finite groups given by Cayley tables, homomorphisms between them, and
//! exact rational probability measures on their elements.
//!
//! Elements are indices `0..order`. Every measure value is a
//! [`Rational`]; nothing in this module touches floating point.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

/// Orders up to this bound are validated by enumerating every triple.
pub const FULL_VALIDATION_ORDER: usize = 64;
const SAMPLED_TRIPLES: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("operation table is not square or has an entry out of range")]
    MalformedTable,
    #[error("operation is not associative: ({a}*{b})*{c} != {a}*({b}*{c})")]
    NonAssociative { a: usize, b: usize, c: usize },
    #[error("no two-sided identity element")]
    MissingIdentity,
    #[error("element {0} has no two-sided inverse")]
    MissingInverse(usize),
    #[error("unsupported constructor: {0}")]
    Unsupported(String),
    #[error("map is not a homomorphism: f({a}*{b}) != f({a})*f({b})")]
    NotHomomorphism { a: usize, b: usize },
    #[error("map table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("map entry {0} is not an element of the target group")]
    EntryOutOfRange(usize),
    #[error("map is not an automorphism")]
    NotAutomorphism,
    #[error("map is not bijective")]
    NotBijective,
    #[error("measures or maps live on different groups")]
    GroupMismatch,
    #[error("weights must be nonnegative and sum to exactly 1 (sum is {0})")]
    NotNormalized(String),
    #[error("measure has {got} weights, group order is {expected}")]
    WeightCount { expected: usize, got: usize },
    #[error("measure is not invariant under the map")]
    NotInvariant,
    #[error("element {0} is out of range")]
    ElementOutOfRange(usize),
}

/// Constructor descriptor accepted by [`make_group`]. Also the JSON form
/// used in scenario files, e.g. `{"cyclic": 6}` or
/// `{"direct_product": [{"cyclic": 2}, {"cyclic": 3}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSpec {
    Cyclic(usize),
    DirectProduct(Box<GroupSpec>, Box<GroupSpec>),
    Symmetric(usize),
    Dihedral(usize),
    Explicit(Vec<Vec<usize>>),
}

struct GroupData {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
    label: String,
}

/// A validated finite group. Cloning is cheap.
#[derive(Clone)]
pub struct FiniteGroup(Arc<GroupData>);

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.order == other.0.order && self.0.identity == other.0.identity && self.0.table == other.0.table)
    }
}

impl Eq for FiniteGroup {}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.0.label, self.0.order)
    }
}

impl FiniteGroup {
    /// Validates an explicit Cayley table, `table[a][b] = a·b`.
    pub fn from_table(rows: Vec<Vec<usize>>, label: impl Into<String>) -> Result<Self, GroupError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(GroupError::MalformedTable);
        }
        let table: Vec<usize> = rows.into_iter().flatten().collect();
        Self::validate(n, table, label.into())
    }

    fn validate(n: usize, table: Vec<usize>, label: String) -> Result<Self, GroupError> {
        let op = |a: usize, b: usize| table[a * n + b];
        if n <= FULL_VALIDATION_ORDER {
            for a in 0..n {
                for b in 0..n {
                    let ab = op(a, b);
                    for c in 0..n {
                        if op(ab, c) != op(a, op(b, c)) {
                            return Err(GroupError::NonAssociative { a, b, c });
                        }
                    }
                }
            }
        } else {
            // weaker: sampled triples only
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..SAMPLED_TRIPLES {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if op(op(a, b), c) != op(a, op(b, c)) {
                    return Err(GroupError::NonAssociative { a, b, c });
                }
            }
        }
        let identity =
            (0..n).find(|&e| (0..n).all(|x| op(e, x) == x && op(x, e) == x)).ok_or(GroupError::MissingIdentity)?;
        let mut inverse = Vec::with_capacity(n);
        for x in 0..n {
            let inv =
                (0..n).find(|&y| op(x, y) == identity && op(y, x) == identity).ok_or(GroupError::MissingInverse(x))?;
            inverse.push(inv);
        }
        Ok(FiniteGroup(Arc::new(GroupData { order: n, table, identity, inverse, label })))
    }

    pub fn cyclic(n: usize) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::Unsupported("cyclic(0)".into()));
        }
        let table = (0..n * n).map(|i| (i / n + i % n) % n).collect();
        Self::validate(n, table, format!("C{n}"))
    }

    /// Elements `(g, h)` are encoded as `g * |H| + h`.
    pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Result<Self, GroupError> {
        let (ng, nh) = (g.order(), h.order());
        let n = ng * nh;
        let mut table = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                let x = g.op(a / nh, b / nh);
                let y = h.op(a % nh, b % nh);
                table[a * n + b] = x * nh + y;
            }
        }
        Self::validate(n, table, format!("{}x{}", g.label(), h.label()))
    }

    /// Permutations of `0..n` in lexicographic order, composed as
    /// `(s·t)(i) = s(t(i))`.
    pub fn symmetric(n: usize) -> Result<Self, GroupError> {
        if !(1..=4).contains(&n) {
            return Err(GroupError::Unsupported(format!("symmetric({n}) (need 1..=4)")));
        }
        let perms = permutations(n);
        let index = |p: &[usize]| perms.iter().position(|q| q.as_slice() == p).unwrap();
        let m = perms.len();
        let mut table = vec![0; m * m];
        for (a, s) in perms.iter().enumerate() {
            for (b, t) in perms.iter().enumerate() {
                let st: Vec<usize> = (0..n).map(|i| s[t[i]]).collect();
                table[a * m + b] = index(&st);
            }
        }
        Self::validate(m, table, format!("S{n}"))
    }

    /// Symmetries of the regular n-gon; `r^i s^j` is encoded as `i + n*j`.
    pub fn dihedral(n: usize) -> Result<Self, GroupError> {
        if !(1..=8).contains(&n) {
            return Err(GroupError::Unsupported(format!("dihedral({n}) (need 1..=8)")));
        }
        let m = 2 * n;
        let mut table = vec![0; m * m];
        for x in 0..m {
            let (a, b) = (x % n, x / n);
            for y in 0..m {
                let (c, d) = (y % n, y / n);
                let rot = if b == 0 { (a + c) % n } else { (a + n - c) % n };
                table[x * m + y] = rot + n * ((b + d) % 2);
            }
        }
        Self::validate(m, table, format!("D{n}"))
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn identity(&self) -> usize {
        self.0.identity
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    #[inline]
    pub fn op(&self, a: usize, b: usize) -> usize {
        self.0.table[a * self.0.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.0.inverse[a]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.0.order
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.op(a, b) == self.op(b, a)))
    }

    /// Order of a single element.
    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity() {
            x = self.op(x, g);
            k += 1;
        }
        k
    }

    /// A small generating set, chosen greedily by element index.
    pub fn generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span: BTreeSet<usize> = BTreeSet::from([self.identity()]);
        for g in self.elements() {
            if span.len() == self.order() {
                break;
            }
            if !span.contains(&g) {
                gens.push(g);
                span = self.closure(&gens);
            }
        }
        gens
    }

    fn closure(&self, gens: &[usize]) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([self.identity()]);
        let mut frontier = vec![self.identity()];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.op(x, g);
                if seen.insert(y) {
                    frontier.push(y);
                }
            }
        }
        seen
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !prefix.contains(&i) {
                prefix.push(i);
                rec(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, &mut out);
    out
}

pub fn make_group(spec: &GroupSpec) -> Result<FiniteGroup, GroupError> {
    match spec {
        GroupSpec::Cyclic(n) => FiniteGroup::cyclic(*n),
        GroupSpec::DirectProduct(g, h) => FiniteGroup::direct_product(&make_group(g)?, &make_group(h)?),
        GroupSpec::Symmetric(n) => FiniteGroup::symmetric(*n),
        GroupSpec::Dihedral(n) => FiniteGroup::dihedral(*n),
        GroupSpec::Explicit(rows) => FiniteGroup::from_table(rows.clone(), "explicit"),
    }
}

/// Anything that maps a group into itself elementwise.
pub trait Endomorphism {
    fn group(&self) -> &FiniteGroup;
    fn apply(&self, x: usize) -> usize;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupHom {
    source: FiniteGroup,
    target: FiniteGroup,
    table: Vec<usize>,
    surjective: bool,
    kernel: Vec<usize>,
}

pub fn make_hom(source: &FiniteGroup, target: &FiniteGroup, table: Vec<usize>) -> Result<GroupHom, GroupError> {
    if table.len() != source.order() {
        return Err(GroupError::TableLength { expected: source.order(), got: table.len() });
    }
    if let Some(&bad) = table.iter().find(|&&y| y >= target.order()) {
        return Err(GroupError::EntryOutOfRange(bad));
    }
    for a in source.elements() {
        for b in source.elements() {
            if table[source.op(a, b)] != target.op(table[a], table[b]) {
                return Err(GroupError::NotHomomorphism { a, b });
            }
        }
    }
    let image: BTreeSet<usize> = table.iter().copied().collect();
    let kernel = source.elements().filter(|&x| table[x] == target.identity()).collect();
    Ok(GroupHom {
        surjective: image.len() == target.order(),
        source: source.clone(),
        target: target.clone(),
        table,
        kernel,
    })
}

impl GroupHom {
    pub fn identity(g: &FiniteGroup) -> GroupHom {
        make_hom(g, g, g.elements().collect()).expect("identity is a homomorphism")
    }

    /// `x ↦ x^k`, written additively `x ↦ kx` on cyclic groups.
    /// Only a homomorphism on abelian groups (or for special k).
    pub fn power(g: &FiniteGroup, k: usize) -> Result<GroupHom, GroupError> {
        let table =
            g.elements().map(|x| (1..k).fold(if k == 0 { g.identity() } else { x }, |acc, _| g.op(acc, x))).collect();
        make_hom(g, g, table)
    }

    pub fn from_fn(
        source: &FiniteGroup,
        target: &FiniteGroup,
        f: impl Fn(usize) -> usize,
    ) -> Result<GroupHom, GroupError> {
        make_hom(source, target, source.elements().map(f).collect())
    }

    pub fn source(&self) -> &FiniteGroup {
        &self.source
    }

    pub fn target(&self) -> &FiniteGroup {
        &self.target
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn is_surjective(&self) -> bool {
        self.surjective
    }

    pub fn kernel(&self) -> &[usize] {
        &self.kernel
    }

    pub fn is_endomorphism(&self) -> bool {
        self.source == self.target
    }

    pub fn is_automorphism(&self) -> bool {
        self.is_endomorphism() && self.surjective
    }

    pub fn compose(&self, inner: &GroupHom) -> Result<GroupHom, GroupError> {
        if inner.target != self.source {
            return Err(GroupError::GroupMismatch);
        }
        let table = inner.table.iter().map(|&y| self.table[y]).collect();
        make_hom(&inner.source, &self.target, table)
    }
}

impl Endomorphism for GroupHom {
    fn group(&self) -> &FiniteGroup {
        &self.source
    }

    fn apply(&self, x: usize) -> usize {
        self.table[x]
    }
}

/// All automorphisms of `g`, found by sending a generating set to every
/// tuple of elements with matching orders and keeping the tuples that
/// extend to a bijective homomorphism.
pub fn automorphisms(g: &FiniteGroup) -> Vec<GroupHom> {
    let gens = g.generators();
    let candidates: Vec<Vec<usize>> =
        gens.iter().map(|&s| g.elements().filter(|&y| g.element_order(y) == g.element_order(s)).collect()).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; gens.len()];
    loop {
        let images: Vec<usize> = choice.iter().zip(&candidates).map(|(&i, c)| c[i]).collect();
        if let Some(hom) = extend_from_generators(g, g, &gens, &images) {
            if hom.is_surjective() {
                out.push(hom);
            }
        }
        // odometer over candidate tuples
        let mut k = 0;
        loop {
            if k == gens.len() {
                return out;
            }
            choice[k] += 1;
            if choice[k] < candidates[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if gens.is_empty() {
            return out;
        }
    }
}

fn extend_from_generators(
    source: &FiniteGroup,
    target: &FiniteGroup,
    gens: &[usize],
    images: &[usize],
) -> Option<GroupHom> {
    let n = source.order();
    let mut table = vec![usize::MAX; n];
    table[source.identity()] = target.identity();
    let mut frontier = vec![source.identity()];
    while let Some(x) = frontier.pop() {
        for (&s, &t) in gens.iter().zip(images) {
            let y = source.op(x, s);
            let fy = target.op(table[x], t);
            if table[y] == usize::MAX {
                table[y] = fy;
                frontier.push(y);
            } else if table[y] != fy {
                return None;
            }
        }
    }
    make_hom(source, target, table).ok()
}

/// Exact probability vector on a finite group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMeasure {
    group: FiniteGroup,
    weights: Vec<Rational>,
}

impl DenseMeasure {
    pub fn new(group: &FiniteGroup, weights: Vec<Rational>) -> Result<Self, GroupError> {
        if weights.len() != group.order() {
            return Err(GroupError::WeightCount { expected: group.order(), got: weights.len() });
        }
        let total: Rational = weights.iter().sum();
        if weights.iter().any(|w| *w < Rational::zero()) || !total.is_one() {
            return Err(GroupError::NotNormalized(total.to_string()));
        }
        Ok(DenseMeasure { group: group.clone(), weights })
    }

    /// Normalizes nonnegative integer masses.
    pub fn from_masses(group: &FiniteGroup, masses: &[u64]) -> Result<Self, GroupError> {
        let total: u64 = masses.iter().sum();
        if total == 0 {
            return Err(GroupError::NotNormalized("0".into()));
        }
        let w = masses.iter().map(|&m| Rational::new(m.into(), total.into())).collect();
        Self::new(group, w)
    }

    pub fn delta(group: &FiniteGroup, g: usize) -> Result<Self, GroupError> {
        if g >= group.order() {
            return Err(GroupError::ElementOutOfRange(g));
        }
        let mut w = vec![Rational::zero(); group.order()];
        w[g] = Rational::one();
        Ok(DenseMeasure { group: group.clone(), weights: w })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, g: usize) -> &Rational {
        &self.weights[g]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.iter().enumerate().filter(|(_, w)| !w.is_zero()).map(|(i, _)| i)
    }

    pub fn is_haar(&self) -> bool {
        let u = Rational::new(1.into(), self.group.order().into());
        self.weights.iter().all(|w| *w == u)
    }

    /// `a·self + (1-a)·other` for rational `a` in `[0, 1]`.
    pub fn mix(&self, a: &Rational, other: &DenseMeasure) -> Result<DenseMeasure, GroupError> {
        if self.group != other.group {
            return Err(GroupError::GroupMismatch);
        }
        let b = Rational::one() - a;
        let w = self.weights.iter().zip(&other.weights).map(|(x, y)| a * x + &b * y).collect();
        DenseMeasure::new(&self.group, w)
    }
}

pub fn haar(group: &FiniteGroup) -> DenseMeasure {
    let u = Rational::new(1.into(), group.order().into());
    DenseMeasure { group: group.clone(), weights: vec![u; group.order()] }
}

/// `(μ*ν)(g) = Σ_h μ(h)·ν(h⁻¹g)`: the image of `μ×ν` under `(x, y) ↦ xy`.
pub fn convolve(mu: &DenseMeasure, nu: &DenseMeasure) -> Result<DenseMeasure, GroupError> {
    if mu.group != nu.group {
        return Err(GroupError::GroupMismatch);
    }
    let g = &mu.group;
    let mut out = vec![Rational::zero(); g.order()];
    for h in mu.support() {
        for k in nu.support() {
            out[g.op(h, k)] += &mu.weights[h] * &nu.weights[k];
        }
    }
    Ok(DenseMeasure { group: g.clone(), weights: out })
}

/// Image measure `μ∘T⁻¹`.
pub fn pushforward<T: Endomorphism>(mu: &DenseMeasure, map: &T) -> Result<DenseMeasure, GroupError> {
    if *map.group() != mu.group {
        return Err(GroupError::GroupMismatch);
    }
    let mut out = vec![Rational::zero(); mu.group.order()];
    for x in mu.support() {
        out[map.apply(x)] += &mu.weights[x];
    }
    Ok(DenseMeasure { group: mu.group.clone(), weights: out })
}

/// Pushforward along a homomorphism into another group.
pub fn pushforward_hom(mu: &DenseMeasure, hom: &GroupHom) -> Result<DenseMeasure, GroupError> {
    if hom.source != mu.group {
        return Err(GroupError::GroupMismatch);
    }
    let mut out = vec![Rational::zero(); hom.target.order()];
    for x in mu.support() {
        out[hom.table[x]] += &mu.weights[x];
    }
    Ok(DenseMeasure { group: hom.target.clone(), weights: out })
}

pub fn is_invariant<T: Endomorphism>(mu: &DenseMeasure, map: &T) -> Result<bool, GroupError> {
    Ok(pushforward(mu, map)? == *mu)
}

/// `T(x) = a·A(x)` with `A` an automorphism.
#[derive(Clone, Debug)]
pub struct AffineMap {
    translation: usize,
    automorphism: GroupHom,
    conjugate: GroupHom,
}

impl AffineMap {
    pub fn new(translation: usize, automorphism: GroupHom) -> Result<Self, GroupError> {
        if !automorphism.is_automorphism() {
            return Err(GroupError::NotAutomorphism);
        }
        let g = automorphism.source().clone();
        if translation >= g.order() {
            return Err(GroupError::ElementOutOfRange(translation));
        }
        let a = translation;
        let a_inv = g.inv(a);
        let conjugate = GroupHom::from_fn(&g, &g, |y| g.op(g.op(a, automorphism.apply(y)), a_inv))?;
        Ok(AffineMap { translation, automorphism, conjugate })
    }

    pub fn translation(&self) -> usize {
        self.translation
    }

    pub fn automorphism(&self) -> &GroupHom {
        &self.automorphism
    }

    /// `B(y) = a·A(y)·a⁻¹`.
    pub fn conjugate(&self) -> &GroupHom {
        &self.conjugate
    }

    pub fn is_bijective(&self) -> bool {
        let g = self.group();
        let image: BTreeSet<usize> = g.elements().map(|x| self.apply(x)).collect();
        image.len() == g.order()
    }

    /// `T(yx) = B(y)·T(x)` for every pair.
    pub fn commutes_with_conjugate(&self) -> bool {
        let g = self.group();
        g.elements()
            .all(|y| g.elements().all(|x| self.apply(g.op(y, x)) == g.op(self.conjugate.apply(y), self.apply(x))))
    }
}

impl Endomorphism for AffineMap {
    fn group(&self) -> &FiniteGroup {
        self.automorphism.source()
    }

    fn apply(&self, x: usize) -> usize {
        self.group().op(self.translation, self.automorphism.apply(x))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceReport {
    pub independent: bool,
    /// First dependent `(E, F)` in bitmask order, with the joint mass
    /// `(m×μ)(E ∩ π⁻¹F)` and the product `m(E)·(m×μ)(π⁻¹F)`.
    pub witness: Option<IndependenceWitness>,
    /// Whether every subset pair was enumerated (as opposed to atoms only).
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceWitness {
    pub e: Vec<usize>,
    pub f: Vec<usize>,
    pub joint: Rational,
    pub product: Rational,
}

/// Largest order for which [`independence_check`] enumerates all subset pairs.
pub const EXHAUSTIVE_INDEPENDENCE_ORDER: usize = 8;

/// On `G×G` with `m×μ`, tests whether the first-coordinate algebra and the
/// algebra pulled back through `(x, y) ↦ xy` are independent.
pub fn independence_check(mu: &DenseMeasure) -> IndependenceReport {
    let g = &mu.group;
    let n = g.order();
    let m = Rational::new(1.into(), n.into());
    // joint[x][z] = P(first = x, product = z) = m · μ(x⁻¹z)
    let joint: Vec<Vec<Rational>> =
        g.elements().map(|x| g.elements().map(|z| &m * &mu.weights[g.op(g.inv(x), z)]).collect()).collect();
    if n > EXHAUSTIVE_INDEPENDENCE_ORDER {
        return independence_on_atoms(&joint, n);
    }
    let full = 1usize << n;
    let bits = |mask: usize| (0..n).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>();
    for f_mask in 1..full {
        // column sums over F, built incrementally from the lowest bit
        let col: Vec<Rational> = (0..n).map(|x| bits(f_mask).iter().map(|&z| joint[x][z].clone()).sum()).collect();
        let p_f: Rational = col.iter().sum();
        let mut joint_e = vec![Rational::zero(); full];
        for e_mask in 1..full {
            let low = e_mask.trailing_zeros() as usize;
            joint_e[e_mask] = &joint_e[e_mask & (e_mask - 1)] + &col[low];
            let m_e = Rational::new((e_mask.count_ones() as usize).into(), n.into());
            let product = &m_e * &p_f;
            if joint_e[e_mask] != product {
                return IndependenceReport {
                    independent: false,
                    witness: Some(IndependenceWitness {
                        e: bits(e_mask),
                        f: bits(f_mask),
                        joint: joint_e[e_mask].clone(),
                        product,
                    }),
                    exhaustive: true,
                };
            }
        }
    }
    IndependenceReport { independent: true, witness: None, exhaustive: true }
}

/// Independence of two finite algebras reduces to their atoms.
fn independence_on_atoms(joint: &[Vec<Rational>], n: usize) -> IndependenceReport {
    let m = Rational::new(1.into(), n.into());
    for z in 0..n {
        let p_z: Rational = (0..n).map(|x| joint[x][z].clone()).sum();
        for x in 0..n {
            let product = &m * &p_z;
            if joint[x][z] != product {
                return IndependenceReport {
                    independent: false,
                    witness: Some(IndependenceWitness { e: vec![x], f: vec![z], joint: joint[x][z].clone(), product }),
                    exhaustive: false,
                };
            }
        }
    }
    IndependenceReport { independent: true, witness: None, exhaustive: false }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitDecomposition {
    /// Each orbit lists `x, T(x), T²(x), …` starting from its smallest element.
    pub orbits: Vec<Vec<usize>>,
    pub masses: Vec<Rational>,
    pub ergodic: bool,
}

/// Invariant sets of a bijection on a finite set are unions of orbits, so
/// `μ` is ergodic iff a single orbit carries all of its mass.
pub fn ergodic_components(
    group: &FiniteGroup,
    map: &GroupHom,
    mu: &DenseMeasure,
) -> Result<OrbitDecomposition, GroupError> {
    if map.source() != group || mu.group() != group {
        return Err(GroupError::GroupMismatch);
    }
    if !map.is_automorphism() {
        return Err(GroupError::NotBijective);
    }
    if !is_invariant(mu, map)? {
        return Err(GroupError::NotInvariant);
    }
    let mut seen = vec![false; group.order()];
    let mut orbits = Vec::new();
    for start in group.elements() {
        if seen[start] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            orbit.push(x);
            x = map.apply(x);
        }
        orbits.push(orbit);
    }
    let masses: Vec<Rational> = orbits.iter().map(|o| o.iter().map(|&x| mu.weight(x).clone()).sum()).collect();
    let ergodic = masses.iter().filter(|m| m.is_one()).count() == 1 && masses.iter().all(|m| m.is_zero() || m.is_one());
    Ok(OrbitDecomposition { orbits, masses, ergodic })
}

/// Random measure with small integer masses; about a third of the draws
/// get zero mass so supports vary.
pub fn random_measure<R: Rng>(group: &FiniteGroup, rng: &mut R) -> DenseMeasure {
    loop {
        let masses: Vec<u64> =
            group.elements().map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=9) }).collect();
        if masses.iter().any(|&m| m > 0) {
            return DenseMeasure::from_masses(group, &masses).expect("positive total");
        }
    }
}

/// Random invariant measure: constant on each cycle of `map`, zero on
/// points that never return to themselves.
pub fn random_invariant_measure<R: Rng, T: Endomorphism>(map: &T, rng: &mut R) -> DenseMeasure {
    let g = map.group();
    let n = g.order();
    let periodic = |x: usize| {
        let mut y = map.apply(x);
        for _ in 0..n {
            if y == x {
                return true;
            }
            y = map.apply(y);
        }
        false
    };
    let mut cycle = vec![usize::MAX; n];
    let mut cycles = 0;
    for start in g.elements().filter(|&x| periodic(x)) {
        if cycle[start] != usize::MAX {
            continue;
        }
        let mut x = start;
        while cycle[x] == usize::MAX {
            cycle[x] = cycles;
            x = map.apply(x);
        }
        cycles += 1;
    }
    loop {
        let per_cycle: Vec<u64> = (0..cycles).map(|_| rng.gen_range(0..=6)).collect();
        let masses: Vec<u64> = cycle.iter().map(|&c| if c == usize::MAX { 0 } else { per_cycle[c] }).collect();
        if masses.iter().any(|&m| m > 0) {
            return DenseMeasure::from_masses(g, &masses).expect("positive total");
        }
    }
}

/// Helper used by tests and scenarios: `gcd(k, n) = 1`.
pub fn coprime(k: usize, n: usize) -> bool {
    k.gcd(&n) == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::r;

    fn c(n: usize) -> FiniteGroup {
        FiniteGroup::cyclic(n).unwrap()
    }

    #[test]
    fn trivial_group() {
        let g = c(1);
        assert_eq!(g.order(), 1);
        assert_eq!(g.identity(), 0);
        assert_eq!(g.generators(), Vec::<usize>::new());
        assert_eq!(automorphisms(&g).len(), 1);
    }

    #[test]
    fn non_associative_table_rejected() {
        // a·b = a - b mod 3 is not associative
        let rows = (0..3).map(|a| (0..3).map(|b| (a + 3 - b) % 3).collect()).collect();
        assert!(matches!(FiniteGroup::from_table(rows, "bad"), Err(GroupError::NonAssociative { .. })));
    }

    #[test]
    fn missing_identity_and_inverse() {
        // constant table: associative, no identity
        let rows = vec![vec![0, 0], vec![0, 0]];
        assert_eq!(FiniteGroup::from_table(rows, "z").unwrap_err(), GroupError::MissingIdentity);
        // multiplicative monoid {1, 0}: identity 0 here is the unit, 1 absorbing
        let rows = vec![vec![0, 1], vec![1, 1]];
        assert_eq!(FiniteGroup::from_table(rows, "m").unwrap_err(), GroupError::MissingInverse(1));
    }

    #[test]
    fn constructors_have_expected_orders() {
        assert_eq!(FiniteGroup::symmetric(3).unwrap().order(), 6);
        assert_eq!(FiniteGroup::symmetric(4).unwrap().order(), 24);
        assert_eq!(FiniteGroup::dihedral(4).unwrap().order(), 8);
        assert!(!FiniteGroup::symmetric(3).unwrap().is_abelian());
        assert!(!FiniteGroup::dihedral(3).unwrap().is_abelian());
        assert!(FiniteGroup::symmetric(5).is_err());
        let spec = GroupSpec::DirectProduct(Box::new(GroupSpec::Cyclic(2)), Box::new(GroupSpec::Cyclic(3)));
        assert_eq!(make_group(&spec).unwrap().order(), 6);
    }

    #[test]
    fn homomorphism_examples() {
        let g5 = c(5);
        let id = GroupHom::identity(&g5);
        assert!(id.is_surjective());
        assert_eq!(id.kernel(), &[0]);

        let double5 = GroupHom::power(&g5, 2).unwrap();
        assert!(double5.is_automorphism());
        assert_eq!(double5.kernel(), &[0]);

        let g4 = c(4);
        let double4 = GroupHom::power(&g4, 2).unwrap();
        assert!(!double4.is_surjective());
        assert_eq!(double4.kernel(), &[0, 2]);
        let image: BTreeSet<usize> = double4.table().iter().copied().collect();
        assert_eq!(image, BTreeSet::from([0, 2]));
    }

    #[test]
    fn not_homomorphism_has_witness() {
        let g = c(3);
        let err = make_hom(&g, &g, vec![1, 2, 0]).unwrap_err();
        assert!(matches!(err, GroupError::NotHomomorphism { .. }));
    }

    #[test]
    fn automorphism_counts() {
        // |Aut(C_n)| = φ(n)
        for (n, phi) in [(1, 1), (2, 1), (5, 4), (8, 4), (12, 4)] {
            assert_eq!(automorphisms(&c(n)).len(), phi, "n = {n}");
        }
        assert_eq!(automorphisms(&FiniteGroup::symmetric(3).unwrap()).len(), 6);
        let klein = FiniteGroup::direct_product(&c(2), &c(2)).unwrap();
        assert_eq!(automorphisms(&klein).len(), 6);
    }

    #[test]
    fn haar_examples() {
        assert_eq!(haar(&c(2)).weights(), &[r(1, 2), r(1, 2)]);
        let s3 = FiniteGroup::symmetric(3).unwrap();
        assert!(haar(&s3).weights().iter().all(|w| *w == r(1, 6)));
        for a in automorphisms(&s3) {
            assert_eq!(pushforward(&haar(&s3), &a).unwrap(), haar(&s3));
        }
    }

    #[test]
    fn convolution_examples() {
        let g = c(3);
        let mu = DenseMeasure::new(&g, vec![r(1, 2), r(1, 2), r(0, 1)]).unwrap();
        let nu = haar(&g);
        assert_eq!(convolve(&mu, &nu).unwrap(), haar(&g));
        let e = DenseMeasure::delta(&g, 0).unwrap();
        assert_eq!(convolve(&e, &mu).unwrap(), mu);
        assert_eq!(convolve(&mu, &DenseMeasure::delta(&c(2), 0).unwrap()), Err(GroupError::GroupMismatch));
    }

    #[test]
    fn convolution_order_on_s3() {
        // δ_a * δ_b = δ_{ab}; S3 is noncommutative so the order is visible
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let (a, b) = (1, 2);
        assert_ne!(s3.op(a, b), s3.op(b, a));
        let ab = convolve(&DenseMeasure::delta(&s3, a).unwrap(), &DenseMeasure::delta(&s3, b).unwrap()).unwrap();
        assert_eq!(ab, DenseMeasure::delta(&s3, s3.op(a, b)).unwrap());
    }

    #[test]
    fn pushforward_examples() {
        let g = c(4);
        let t = GroupHom::power(&g, 2).unwrap();
        let img = pushforward(&haar(&g), &t).unwrap();
        assert_eq!(img.weights(), &[r(1, 2), r(0, 1), r(1, 2), r(0, 1)]);
        let mu = DenseMeasure::new(&g, vec![r(1, 4), r(1, 2), r(0, 1), r(1, 4)]).unwrap();
        assert_eq!(pushforward(&mu, &GroupHom::identity(&g)).unwrap(), mu);
    }

    #[test]
    fn invariance_examples() {
        let g5 = c(5);
        let t = GroupHom::power(&g5, 2).unwrap();
        assert!(is_invariant(&haar(&g5), &t).unwrap());
        assert!(is_invariant(&DenseMeasure::delta(&g5, 0).unwrap(), &t).unwrap());
        let d1 = DenseMeasure::delta(&g5, 1).unwrap();
        assert!(!is_invariant(&d1, &t).unwrap());
        assert_eq!(pushforward(&d1, &t).unwrap(), DenseMeasure::delta(&g5, 2).unwrap());
        // endomorphisms that are not surjective still fix δ_e
        let g4 = c(4);
        assert!(is_invariant(&DenseMeasure::delta(&g4, 0).unwrap(), &GroupHom::power(&g4, 2).unwrap()).unwrap());
    }

    #[test]
    fn affine_map_on_s3() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        for a in automorphisms(&s3) {
            for t in s3.elements() {
                let map = AffineMap::new(t, a.clone()).unwrap();
                assert!(map.is_bijective());
                assert!(map.commutes_with_conjugate());
                assert!(map.conjugate().is_automorphism());
                assert!(is_invariant(&haar(&s3), &map).unwrap());
            }
        }
        let g4 = c(4);
        assert_eq!(AffineMap::new(1, GroupHom::power(&g4, 2).unwrap()).unwrap_err(), GroupError::NotAutomorphism);
    }

    #[test]
    fn independence_examples() {
        let c2 = c(2);
        assert!(independence_check(&haar(&c2)).independent);
        let mu = DenseMeasure::new(&c2, vec![r(3, 4), r(1, 4)]).unwrap();
        let rep = independence_check(&mu);
        assert!(!rep.independent);
        let w = rep.witness.unwrap();
        assert_eq!((w.e, w.f), (vec![0], vec![0]));
        assert_eq!(w.joint, r(3, 8));
        assert_eq!(w.product, r(1, 4));
        assert!(independence_check(&haar(&FiniteGroup::symmetric(3).unwrap())).independent);
    }

    #[test]
    fn independence_atom_route_agrees() {
        let g = FiniteGroup::dihedral(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mu = random_measure(&g, &mut rng);
            let n = g.order();
            let m = Rational::new(1.into(), n.into());
            let joint: Vec<Vec<Rational>> =
                g.elements().map(|x| g.elements().map(|z| &m * mu.weight(g.op(g.inv(x), z))).collect()).collect();
            assert_eq!(independence_check(&mu).independent, independence_on_atoms(&joint, n).independent);
        }
        let big = c(12);
        assert!(independence_check(&haar(&big)).independent);
        assert!(!independence_check(&DenseMeasure::delta(&big, 3).unwrap()).exhaustive);
    }

    #[test]
    fn ergodic_components_examples() {
        let g = c(5);
        let t = GroupHom::power(&g, 2).unwrap();
        let mu = DenseMeasure::from_masses(&g, &[0, 1, 1, 1, 1]).unwrap();
        let dec = ergodic_components(&g, &t, &mu).unwrap();
        assert_eq!(dec.orbits, vec![vec![0], vec![1, 2, 4, 3]]);
        assert!(dec.ergodic);
        let dec = ergodic_components(&g, &t, &haar(&g)).unwrap();
        assert!(!dec.ergodic);
        assert_eq!(dec.masses[0], r(1, 5));
        let d1 = DenseMeasure::delta(&g, 1).unwrap();
        assert_eq!(ergodic_components(&g, &t, &d1).unwrap_err(), GroupError::NotInvariant);
        let g4 = c(4);
        let t4 = GroupHom::power(&g4, 2).unwrap();
        let e = DenseMeasure::delta(&g4, 0).unwrap();
        assert_eq!(ergodic_components(&g4, &t4, &e).unwrap_err(), GroupError::NotBijective);
    }

    #[test]
    fn random_invariant_measures_are_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = c(12);
        for t in automorphisms(&g) {
            let mu = random_invariant_measure(&t, &mut rng);
            assert!(is_invariant(&mu, &t).unwrap());
        }
        let g4 = c(4);
        let t = GroupHom::power(&g4, 2).unwrap();
        for _ in 0..10 {
            let mu = random_invariant_measure(&t, &mut rng);
            assert_eq!(mu.support().collect::<Vec<_>>(), vec![0]);
        }
    }
}
