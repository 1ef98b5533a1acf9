//! Skew products `T(x, g) = (Sx, σ(g)·φ(x_0..x_{k-1}))` over a shift base
//! with a finite fiber group, their invariant measures, and product
//! systems.
//!
//! Every measure handled here has the form `μ₀ × ρ` for a base measure
//! `μ₀` and a fiber distribution `ρ`; invariance is checked exactly on
//! cylinder-times-fiber tables.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::entropy::{
    self, block_entropy_rate, entropy_rate, BlockSource, EntropyError, EntropyEstimate, EstimateMethod,
};
use crate::finite_group::{haar, DenseMeasure, FiniteGroup, GroupError, GroupHom};
use crate::rational::{compensated_sum, to_f64, Rational};
use crate::symbolic::{
    self, decode, encode, word_count, MeasureKind, ShiftMeasure, ShiftSystem, SymbolicError, STATE_LIMIT,
};

/// Largest cocycle window supported.
pub const MAX_WINDOW: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkewError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error("fiber map is not an automorphism of the fiber")]
    NotAutomorphism,
    #[error("cocycle is undefined on window {0:?}")]
    PhiIncomplete(Vec<usize>),
    #[error("cocycle window size must be in 1..={MAX_WINDOW}, got {0}")]
    WindowSize(usize),
    #[error("cocycle value {0} is not a fiber element")]
    FiberOutOfRange(usize),
    #[error("base measure does not live on the skew system's base")]
    SystemMismatch,
    #[error("point fiber {0} does not give an invariant measure")]
    NotInvariant(usize),
    #[error("unsupported base measure for the lifted chain: {0}")]
    UnsupportedBase(String),
    #[error("mixture weights must be positive and sum to 1")]
    BadWeights,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewSystem {
    base: ShiftSystem,
    fiber: FiniteGroup,
    sigma: GroupHom,
    window: usize,
    /// Cocycle values indexed by window code.
    phi: Vec<usize>,
}

/// Validates a skew system. `phi` lists `(window, value)` pairs and must
/// cover every window of length `window` over the base alphabet.
pub fn make_skew(
    base: &ShiftSystem,
    fiber: &FiniteGroup,
    sigma: GroupHom,
    window: usize,
    phi: &[(Vec<usize>, usize)],
) -> Result<SkewSystem, SkewError> {
    if window == 0 || window > MAX_WINDOW {
        return Err(SkewError::WindowSize(window));
    }
    if sigma.source() != fiber || !sigma.is_automorphism() {
        return Err(SkewError::NotAutomorphism);
    }
    let n = base.alphabet().order();
    let mut table = vec![None; word_count(n, window)?];
    for (w, v) in phi {
        if w.len() != window || w.iter().any(|&s| s >= n) {
            return Err(SkewError::PhiIncomplete(w.clone()));
        }
        if *v >= fiber.order() {
            return Err(SkewError::FiberOutOfRange(*v));
        }
        table[encode(w, n)] = Some(*v);
    }
    let phi = table
        .iter()
        .enumerate()
        .map(|(code, v)| v.ok_or_else(|| SkewError::PhiIncomplete(decode(code, n, window))))
        .collect::<Result<_, _>>()?;
    Ok(SkewSystem { base: base.clone(), fiber: fiber.clone(), sigma, window, phi })
}

impl SkewSystem {
    pub fn from_fn(
        base: &ShiftSystem,
        fiber: &FiniteGroup,
        sigma: GroupHom,
        window: usize,
        phi: impl Fn(&[usize]) -> usize,
    ) -> Result<Self, SkewError> {
        let n = base.alphabet().order();
        let pairs: Vec<(Vec<usize>, usize)> = (0..word_count(n, window.clamp(1, MAX_WINDOW))?)
            .map(|c| {
                let w = decode(c, n, window.clamp(1, MAX_WINDOW));
                let v = phi(&w);
                (w, v)
            })
            .collect();
        make_skew(base, fiber, sigma, window, &pairs)
    }

    pub fn base(&self) -> &ShiftSystem {
        &self.base
    }

    pub fn fiber(&self) -> &FiniteGroup {
        &self.fiber
    }

    pub fn sigma(&self) -> &GroupHom {
        &self.sigma
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn phi(&self, w: &[usize]) -> usize {
        self.phi[encode(&w[..self.window], self.base.alphabet().order())]
    }

    /// `σ(g)·φ(w)`.
    pub fn fiber_step(&self, g: usize, w: &[usize]) -> usize {
        self.fiber.op(self.sigma.table()[g], self.phi(w))
    }

    /// One step of the skew map on a finite base window; the result is one
    /// symbol shorter (the window must be at least `k` long).
    pub fn apply(&self, x: &[usize], g: usize) -> (Vec<usize>, usize) {
        (x[1..].to_vec(), self.fiber_step(g, x))
    }

    /// `T(y·(x,g)) = σ(y)·T(x,g)` for every fiber `y` at the given points.
    pub fn commutes_with_fiber_action(&self, points: &[(Vec<usize>, usize)]) -> bool {
        points.iter().all(|(x, g)| {
            let (tx, tg) = self.apply(x, *g);
            self.fiber.elements().all(|y| {
                let (sx, sg) = self.apply(x, self.fiber.op(y, *g));
                sx == tx && sg == self.fiber.op(self.sigma.table()[y], tg)
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberPart {
    Haar,
    Point(usize),
    Mixture(Vec<(String, FiberPart)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewMeasure {
    base: ShiftMeasure,
    part: FiberPart,
    fiber: DenseMeasure,
}

impl SkewMeasure {
    pub fn base(&self) -> &ShiftMeasure {
        &self.base
    }

    pub fn part(&self) -> &FiberPart {
        &self.part
    }

    pub fn fiber_distribution(&self) -> &DenseMeasure {
        &self.fiber
    }

    /// `μ₀ × δ_g`, accepted only if `σ(g)·φ(w) = g` on every window in
    /// the support of `μ₀`.
    pub fn point(sys: &SkewSystem, base: &ShiftMeasure, g: usize) -> Result<Self, SkewError> {
        check_base(sys, base)?;
        if g >= sys.fiber.order() {
            return Err(SkewError::FiberOutOfRange(g));
        }
        if !point_condition(sys, &support_windows(sys, base)?, g) {
            return Err(SkewError::NotInvariant(g));
        }
        Ok(SkewMeasure { base: base.clone(), part: FiberPart::Point(g), fiber: DenseMeasure::delta(&sys.fiber, g)? })
    }

    /// Convex combination of measures over the same base.
    pub fn mixture(parts: &[(Rational, SkewMeasure)]) -> Result<Self, SkewError> {
        let (_, first) = parts.first().ok_or(SkewError::BadWeights)?;
        if parts.iter().any(|(w, _)| *w <= Rational::zero()) || !parts.iter().map(|(w, _)| w).sum::<Rational>().is_one()
        {
            return Err(SkewError::BadWeights);
        }
        if parts.iter().any(|(_, m)| m.base != first.base) {
            return Err(SkewError::SystemMismatch);
        }
        let group = first.fiber.group();
        let mut weights = vec![Rational::zero(); group.order()];
        for (w, m) in parts {
            for (acc, x) in weights.iter_mut().zip(m.fiber.weights()) {
                *acc += w * x;
            }
        }
        Ok(SkewMeasure {
            base: first.base.clone(),
            part: FiberPart::Mixture(parts.iter().map(|(w, m)| (w.to_string(), m.part.clone())).collect()),
            fiber: DenseMeasure::new(group, weights)?,
        })
    }
}

fn check_base(sys: &SkewSystem, base: &ShiftMeasure) -> Result<(), SkewError> {
    if base.system() != &sys.base {
        return Err(SkewError::SystemMismatch);
    }
    Ok(())
}

fn support_windows(sys: &SkewSystem, base: &ShiftMeasure) -> Result<Vec<Vec<usize>>, SkewError> {
    let n = sys.base.alphabet().order();
    let dist = symbolic::block_distribution(base, sys.window)?;
    Ok(dist.iter().enumerate().filter(|(_, p)| !p.is_zero()).map(|(c, _)| decode(c, n, sys.window)).collect())
}

fn point_condition(sys: &SkewSystem, windows: &[Vec<usize>], g: usize) -> bool {
    windows.iter().all(|w| sys.fiber_step(g, w) == g)
}

/// The Haar extension `μ₀′ = μ₀ × m`.
pub fn haar_extension(base: &ShiftMeasure, sys: &SkewSystem) -> Result<SkewMeasure, SkewError> {
    check_base(sys, base)?;
    Ok(SkewMeasure { base: base.clone(), part: FiberPart::Haar, fiber: haar(&sys.fiber) })
}

/// Exact distribution of `(x_0..x_{len-1}, g_0)`, indexed by
/// `word_code · |F| + g`.
pub fn skew_table(mu: &SkewMeasure, len: usize) -> Result<Vec<Rational>, SkewError> {
    let base = symbolic::block_distribution(&mu.base, len)?;
    let f = mu.fiber.weights();
    Ok(base.iter().flat_map(|p| f.iter().map(move |q| p * q)).collect())
}

/// Distribution of `(x_0..x_{len-1}, g_0)` after one application of the
/// skew map, computed from the table at length `len + 1`.
pub fn pushforward_table(sys: &SkewSystem, mu: &SkewMeasure, len: usize) -> Result<Vec<Rational>, SkewError> {
    let n = sys.base.alphabet().order();
    let nf = sys.fiber.order();
    let src_len = (len + 1).max(sys.window);
    let src = skew_table(mu, src_len)?;
    let mut out = vec![Rational::zero(); word_count(n, len)? * nf];
    for (idx, p) in src.iter().enumerate().filter(|(_, p)| !p.is_zero()) {
        let (code, g) = (idx / nf, idx % nf);
        let x = decode(code, n, src_len);
        let image = encode(&x[1..=len], n);
        out[image * nf + sys.fiber_step(g, &x)] += p;
    }
    Ok(out)
}

/// Checks `μ∘T⁻¹ = μ` on all (cylinder, fiber) cells up to `depth`.
pub fn is_skew_invariant(sys: &SkewSystem, mu: &SkewMeasure, depth: usize) -> Result<bool, SkewError> {
    for len in 0..=depth {
        if pushforward_table(sys, mu, len)? != skew_table(mu, len)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fiber marginal of the skew table: the base block distribution seen
/// through the projection.
pub fn project(mu: &SkewMeasure, len: usize) -> Result<Vec<Rational>, SkewError> {
    let nf = mu.fiber.group().order();
    Ok(skew_table(mu, len)?.chunks(nf).map(|c| c.iter().sum()).collect())
}

pub fn projects_to(mu: &SkewMeasure, base: &ShiftMeasure, depth: usize) -> Result<bool, SkewError> {
    for len in 0..=depth {
        if project(mu, len)? != symbolic::block_distribution(base, len)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `m * μ` evaluated cellwise: `Σ_y m(y)·μ(w, y⁻¹g)`.
pub fn fiber_convolve_table(mu: &SkewMeasure, len: usize) -> Result<Vec<Rational>, SkewError> {
    let group = mu.fiber.group();
    let nf = group.order();
    let table = skew_table(mu, len)?;
    let m = Rational::new(1.into(), nf.into());
    let mut out = vec![Rational::zero(); table.len()];
    for (cell, chunk) in out.chunks_mut(nf).zip(table.chunks(nf)) {
        for (g, slot) in cell.iter_mut().enumerate() {
            for y in group.elements() {
                *slot += &m * &chunk[group.op(group.inv(y), g)];
            }
        }
    }
    Ok(out)
}

/// Whether `m * μ` equals the Haar extension of `μ`'s base on every cell
/// up to `depth`.
pub fn haar_absorbs(sys: &SkewSystem, mu: &SkewMeasure, depth: usize) -> Result<bool, SkewError> {
    let ext = haar_extension(&mu.base, sys)?;
    for len in 0..=depth {
        if fiber_convolve_table(mu, len)? != skew_table(&ext, len)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The observed pair process `(x_n, g_n)` as a block source over the
/// alphabet `A × F` (pair `(a, g)` coded `a·|F| + g`).
pub struct PairProcess<'a> {
    sys: &'a SkewSystem,
    mu: &'a SkewMeasure,
}

impl<'a> PairProcess<'a> {
    pub fn new(sys: &'a SkewSystem, mu: &'a SkewMeasure) -> Self {
        PairProcess { sys, mu }
    }
}

impl BlockSource for PairProcess<'_> {
    fn alphabet_size(&self) -> usize {
        self.sys.base.alphabet().order() * self.sys.fiber.order()
    }

    fn block_distribution(&self, len: usize) -> Result<Vec<Rational>, SymbolicError> {
        let n = self.sys.base.alphabet().order();
        let nf = self.sys.fiber.order();
        let pair = n * nf;
        let out_len = word_count(pair, len)?;
        let ext = len + self.sys.window - 1;
        let base = symbolic::block_distribution(&self.mu.base, ext)?;
        let mut out = vec![Rational::zero(); out_len];
        if len == 0 {
            out[0] = Rational::one();
            return Ok(out);
        }
        for (code, p) in base.iter().enumerate().filter(|(_, p)| !p.is_zero()) {
            let x = decode(code, n, ext);
            for (g0, q) in self.mu.fiber.weights().iter().enumerate().filter(|(_, q)| !q.is_zero()) {
                let mut g = g0;
                let mut word = 0;
                for i in 0..len {
                    word = word * pair + x[i] * nf + g;
                    g = self.sys.fiber_step(g, &x[i..]);
                }
                out[word] += p * q;
            }
        }
        Ok(out)
    }
}

/// Base measure as a chain whose states each emit one fixed symbol
/// (the emissions do not affect the entropy).
struct SymbolChain {
    initial: Vec<Rational>,
    transition: Vec<Vec<Rational>>,
}

fn symbol_chain(base: &ShiftMeasure) -> Result<SymbolChain, SkewError> {
    let n = base.alphabet().order();
    match base.kind() {
        MeasureKind::Bernoulli(p) => {
            Ok(SymbolChain { initial: p.weights().to_vec(), transition: vec![p.weights().to_vec(); n] })
        }
        MeasureKind::Markov(c) => {
            Ok(SymbolChain { initial: c.initial().to_vec(), transition: c.transition().to_vec() })
        }
        MeasureKind::PeriodicOrbit(w) => {
            let p = w.len();
            Ok(SymbolChain {
                initial: vec![Rational::new(1.into(), p.into()); p],
                transition: (0..p)
                    .map(|i| {
                        (0..p).map(|j| if j == (i + 1) % p { Rational::one() } else { Rational::zero() }).collect()
                    })
                    .collect(),
            })
        }
        _ => Err(SkewError::UnsupportedBase(base.describe())),
    }
}

/// Entropy of the skew system under `μ`, from the lifted chain on
/// (base state path of length k, fiber element). The fiber coordinate is
/// a deterministic function of the path, so only the base transitions
/// contribute. `upper_bounds` carries the pair-process estimates
/// `h_1..h_len` as an independent route.
pub fn skew_entropy(sys: &SkewSystem, mu: &SkewMeasure, len: usize) -> Result<EntropyEstimate, SkewError> {
    check_base(sys, &mu.base)?;
    let chain = symbol_chain(&mu.base)?;
    let s = chain.initial.len();
    let k = sys.window;
    let nf = sys.fiber.order();
    let paths = (s as u128).pow(k as u32) * nf as u128;
    if paths > STATE_LIMIT as u128 {
        return Err(SymbolicError::DepthLimitExceeded { states: paths, limit: STATE_LIMIT }.into());
    }
    // P(path) for state paths of length k, by extension
    let mut path_mass: Vec<(Vec<usize>, Rational)> =
        chain.initial.iter().enumerate().filter(|(_, p)| !p.is_zero()).map(|(i, p)| (vec![i], p.clone())).collect();
    for _ in 1..k {
        path_mass = path_mass
            .into_iter()
            .flat_map(|(path, p)| {
                let last = *path.last().unwrap();
                chain.transition[last]
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| !t.is_zero())
                    .map(|(j, t)| {
                        let mut next = path.clone();
                        next.push(j);
                        (next, &p * t)
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    let row_entropy: Vec<f64> = chain.transition.iter().map(|row| entropy::shannon(row)).collect();
    let mut terms = Vec::new();
    for (path, p) in &path_mass {
        for q in mu.fiber.weights().iter().filter(|q| !q.is_zero()) {
            terms.push(to_f64(&(p * q)) * row_entropy[*path.last().unwrap()]);
        }
    }
    let value = compensated_sum(terms);

    let pair = PairProcess::new(sys, mu);
    let block = block_entropy_rate(&pair, len.max(1), 1e-9)?;
    let last = *block.upper_bounds.last().unwrap();
    Ok(EntropyEstimate {
        value,
        upper_bounds: block.upper_bounds,
        lower_bound: None,
        method: EstimateMethod::ClosedForm,
        l_max: len.max(1),
        converged: (last - value).abs() < 1e-9,
        gap: block.gap,
        note: Some(format!("lifted chain on {} states", path_mass.len() * nf)),
    })
}

/// `h(σ, m)` for the fiber automorphism under Haar measure: the
/// conditional entropy of `σ^{L-1}(g)` given `g, …, σ^{L-2}(g)`, which is
/// zero for a finite fiber once `L ≥ 2`.
pub fn fiber_haar_entropy(sys: &SkewSystem) -> f64 {
    let nf = sys.fiber.order();
    let m = Rational::new(1.into(), nf.into());
    // joint of (g, σ g): supported on the graph of σ
    let joint: Vec<Rational> =
        (0..nf * nf).map(|c| if sys.sigma.table()[c / nf] == c % nf { m.clone() } else { Rational::zero() }).collect();
    let marginal = vec![m; nf];
    entropy::shannon(&joint) - entropy::shannon(&marginal)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyAdditionReport {
    pub base_entropy: f64,
    pub fiber_entropy: f64,
    pub skew_entropy: f64,
    pub difference: f64,
    pub pass: bool,
}

pub const ADDITION_TOLERANCE: f64 = 1e-9;

pub fn entropy_addition_report(sys: &SkewSystem, base: &ShiftMeasure) -> Result<EntropyAdditionReport, SkewError> {
    let base_entropy = match entropy::closed_form_entropy(base) {
        Ok(h) => h,
        Err(_) => entropy_rate(base, 10, ADDITION_TOLERANCE)?.value,
    };
    let fiber_entropy = fiber_haar_entropy(sys);
    let skew = skew_entropy(sys, &haar_extension(base, sys)?, 4)?.value;
    let difference = skew - (base_entropy + fiber_entropy);
    Ok(EntropyAdditionReport {
        base_entropy,
        fiber_entropy,
        skew_entropy: skew,
        difference,
        pass: difference.abs() < ADDITION_TOLERANCE,
    })
}

/// `μ × ν` over the product alphabet; pair `(a, b)` is coded `a·|B| + b`,
/// matching [`FiniteGroup::direct_product`].
#[derive(Clone, Debug)]
pub struct ProductMeasure {
    left: ShiftMeasure,
    right: ShiftMeasure,
    alphabet: FiniteGroup,
}

pub fn product_system(mu: &ShiftMeasure, nu: &ShiftMeasure) -> Result<ProductMeasure, SkewError> {
    Ok(ProductMeasure {
        alphabet: FiniteGroup::direct_product(mu.alphabet(), nu.alphabet())?,
        left: mu.clone(),
        right: nu.clone(),
    })
}

impl ProductMeasure {
    pub fn alphabet(&self) -> &FiniteGroup {
        &self.alphabet
    }

    pub fn factors(&self) -> (&ShiftMeasure, &ShiftMeasure) {
        (&self.left, &self.right)
    }
}

impl BlockSource for ProductMeasure {
    fn alphabet_size(&self) -> usize {
        self.alphabet.order()
    }

    fn block_distribution(&self, len: usize) -> Result<Vec<Rational>, SymbolicError> {
        let (na, nb) = (self.left.alphabet().order(), self.right.alphabet().order());
        let total = word_count(na * nb, len)?;
        let a = symbolic::block_distribution(&self.left, len)?;
        let b = symbolic::block_distribution(&self.right, len)?;
        let mut out = vec![Rational::zero(); total];
        for (ca, pa) in a.iter().enumerate().filter(|(_, p)| !p.is_zero()) {
            let wa = decode(ca, na, len);
            for (cb, pb) in b.iter().enumerate().filter(|(_, p)| !p.is_zero()) {
                let wb = decode(cb, nb, len);
                let code = wa.iter().zip(&wb).fold(0, |acc, (x, y)| acc * na * nb + x * nb + y);
                out[code] = pa * pb;
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductEntropyReport {
    pub left: f64,
    pub right: f64,
    pub product: f64,
    pub difference: f64,
    pub pass: bool,
}

pub fn product_entropy_check(
    mu: &ShiftMeasure,
    nu: &ShiftMeasure,
    len: usize,
) -> Result<ProductEntropyReport, SkewError> {
    let left = entropy_rate(mu, len, ADDITION_TOLERANCE)?.value;
    let right = entropy_rate(nu, len, ADDITION_TOLERANCE)?.value;
    let product = block_entropy_rate(&product_system(mu, nu)?, len, ADDITION_TOLERANCE)?.value;
    let difference = product - (left + right);
    Ok(ProductEntropyReport { left, right, product, difference, pass: difference.abs() < ADDITION_TOLERANCE })
}

/// Point-fiber measures satisfying the fixed-point condition, followed by
/// the Haar extension. Each is checked for invariance before it is
/// returned.
pub fn invariant_measures_in_fiber(sys: &SkewSystem, base: &ShiftMeasure) -> Result<Vec<SkewMeasure>, SkewError> {
    check_base(sys, base)?;
    let windows = support_windows(sys, base)?;
    let mut out: Vec<SkewMeasure> = sys
        .fiber
        .elements()
        .filter(|&g| point_condition(sys, &windows, g))
        .map(|g| SkewMeasure::point(sys, base, g))
        .collect::<Result<_, _>>()?;
    if sys.fiber.order() > 1 || out.is_empty() {
        out.push(haar_extension(base, sys)?);
    }
    let depth = sys.window + 2;
    for m in &out {
        debug_assert!(is_skew_invariant(sys, m, depth)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::r;

    const H_QUARTER: f64 = 0.562_335_144_618_808_6;

    fn c2() -> FiniteGroup {
        FiniteGroup::cyclic(2).unwrap()
    }

    fn base() -> ShiftSystem {
        ShiftSystem::one_sided(&c2())
    }

    fn bern(p1: Rational) -> ShiftMeasure {
        let p0 = Rational::one() - &p1;
        ShiftMeasure::bernoulli_weights(&base(), vec![p0, p1]).unwrap()
    }

    fn first_symbol_skew() -> SkewSystem {
        SkewSystem::from_fn(&base(), &c2(), GroupHom::identity(&c2()), 1, |w| w[0]).unwrap()
    }

    fn trivial_cocycle() -> SkewSystem {
        SkewSystem::from_fn(&base(), &c2(), GroupHom::identity(&c2()), 1, |_| 0).unwrap()
    }

    #[test]
    fn construction() {
        first_symbol_skew();
        let c4 = FiniteGroup::cyclic(4).unwrap();
        let doubling = GroupHom::power(&c4, 2).unwrap();
        assert_eq!(SkewSystem::from_fn(&base(), &c4, doubling, 1, |_| 0), Err(SkewError::NotAutomorphism));
        let err = make_skew(&base(), &c2(), GroupHom::identity(&c2()), 1, &[(vec![0], 1)]);
        assert_eq!(err, Err(SkewError::PhiIncomplete(vec![1])));
        assert_eq!(
            SkewSystem::from_fn(&base(), &c2(), GroupHom::identity(&c2()), 4, |_| 0),
            Err(SkewError::WindowSize(4))
        );
    }

    #[test]
    fn commutation_with_fiber_translation() {
        let c3 = FiniteGroup::cyclic(3).unwrap();
        let neg = GroupHom::power(&c3, 2).unwrap();
        let sys = SkewSystem::from_fn(&base(), &c3, neg, 2, |w| (w[0] + 2 * w[1]) % 3).unwrap();
        let points: Vec<(Vec<usize>, usize)> = (0..8).map(|c| (decode(c, 2, 3), c % 3)).collect();
        assert!(sys.commutes_with_fiber_action(&points));
    }

    #[test]
    fn haar_extension_tables() {
        let sys = first_symbol_skew();
        let mu0 = bern(r(1, 4));
        let ext = haar_extension(&mu0, &sys).unwrap();
        let table = skew_table(&ext, 3).unwrap();
        let b = symbolic::block_distribution(&mu0, 3).unwrap();
        for (i, p) in table.iter().enumerate() {
            assert_eq!(*p, &b[i / 2] * r(1, 2));
        }
        assert!(projects_to(&ext, &mu0, 8).unwrap());
        assert!(is_skew_invariant(&sys, &ext, 6).unwrap());
        let other = ShiftMeasure::haar(&ShiftSystem::two_sided(&c2()));
        assert_eq!(haar_extension(&other, &sys), Err(SkewError::SystemMismatch));
    }

    #[test]
    fn non_invariant_fiber_distribution_is_detected() {
        let sys = first_symbol_skew();
        let skewed = SkewMeasure {
            base: bern(r(1, 4)),
            part: FiberPart::Point(0),
            fiber: DenseMeasure::delta(&c2(), 0).unwrap(),
        };
        assert!(!is_skew_invariant(&sys, &skewed, 2).unwrap());
        assert_eq!(SkewMeasure::point(&sys, &bern(r(1, 4)), 0), Err(SkewError::NotInvariant(0)));
    }

    #[test]
    fn skew_entropy_examples() {
        let sys = first_symbol_skew();
        let est = skew_entropy(&sys, &haar_extension(&bern(r(1, 4)), &sys).unwrap(), 6).unwrap();
        assert!((est.value - H_QUARTER).abs() < 1e-12);
        assert!(est.converged, "{est:?}");

        let frozen = trivial_cocycle();
        let point = SkewMeasure::point(&frozen, &bern(r(1, 4)), 0).unwrap();
        let est = skew_entropy(&frozen, &point, 4).unwrap();
        assert!((est.value - H_QUARTER).abs() < 1e-12);

        let per = ShiftMeasure::periodic(&base(), vec![0, 1]).unwrap();
        let est = skew_entropy(&sys, &haar_extension(&per, &sys).unwrap(), 6).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.upper_bounds[5].abs() < 1e-12);
    }

    #[test]
    fn addition_reports() {
        let sys = first_symbol_skew();
        let rep = entropy_addition_report(&sys, &bern(r(1, 4))).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.fiber_entropy, 0.0);
        let markov = ShiftMeasure::markov(&base(), vec![vec![r(2, 3), r(1, 3)], vec![r(1, 3), r(2, 3)]], None).unwrap();
        let rep = entropy_addition_report(&sys, &markov).unwrap();
        assert!(rep.pass);
        assert!((rep.skew_entropy - 0.636514).abs() < 1e-6);
    }

    #[test]
    fn product_examples() {
        let rep = product_entropy_check(&bern(r(1, 4)), &ShiftMeasure::haar(&base()), 3).unwrap();
        assert!(rep.pass);
        assert!((rep.product - 1.255482).abs() < 1e-6);

        let orbit = ShiftMeasure::constant(&base(), 0).unwrap();
        let rep = product_entropy_check(&bern(r(1, 4)), &orbit, 3).unwrap();
        assert!((rep.product - H_QUARTER).abs() < 1e-12);

        let per = ShiftMeasure::periodic(&base(), vec![0, 1]).unwrap();
        let prod = product_system(&per, &per).unwrap();
        // the phases are independent: four equally likely joint words
        for len in 1..=5 {
            assert!((entropy::block_entropy(&prod, len).unwrap() - 4f64.ln()).abs() < 1e-15);
        }
        for len in 2..=5 {
            assert_eq!(entropy::conditional_block_entropy(&prod, len).unwrap(), 0.0);
        }
    }

    #[test]
    fn fiber_enumeration() {
        let mu0 = bern(r(1, 4));
        let list = invariant_measures_in_fiber(&trivial_cocycle(), &mu0).unwrap();
        let parts: Vec<_> = list.iter().map(|m| m.part().clone()).collect();
        assert_eq!(parts, vec![FiberPart::Point(0), FiberPart::Point(1), FiberPart::Haar]);

        let list = invariant_measures_in_fiber(&first_symbol_skew(), &mu0).unwrap();
        assert_eq!(list.len(), 1);
        assert_eq!(list[0].part(), &FiberPart::Haar);

        let trivial = FiniteGroup::cyclic(1).unwrap();
        let sys = SkewSystem::from_fn(&base(), &trivial, GroupHom::identity(&trivial), 1, |_| 0).unwrap();
        let list = invariant_measures_in_fiber(&sys, &mu0).unwrap();
        assert_eq!(list.len(), 1);
        assert_eq!(project(&list[0], 4).unwrap(), symbolic::block_distribution(&mu0, 4).unwrap());
    }

    #[test]
    fn mixtures_and_absorption() {
        let sys = trivial_cocycle();
        let mu0 = bern(r(1, 3));
        let list = invariant_measures_in_fiber(&sys, &mu0).unwrap();
        let mix = SkewMeasure::mixture(&[(r(1, 3), list[0].clone()), (r(2, 3), list[1].clone())]).unwrap();
        assert!(is_skew_invariant(&sys, &mix, 4).unwrap());
        assert!(projects_to(&mix, &mu0, 4).unwrap());
        for m in list.iter().chain([&mix]) {
            assert!(haar_absorbs(&sys, m, 4).unwrap());
        }
        assert_eq!(SkewMeasure::mixture(&[(r(1, 2), list[0].clone())]), Err(SkewError::BadWeights));
    }
}
