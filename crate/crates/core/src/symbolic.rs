//! Full group shifts `G^ℕ` and `G^ℤ` over a finite alphabet group, with
//! invariant measures whose cylinder probabilities are exact rationals.
//!
//! Words of length `L` are indexed by their base-`|G|` code with the first
//! symbol most significant, so block distributions are dense vectors in
//! lexicographic order.

use std::io::{self, Write};

use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::finite_group::{self, DenseMeasure, FiniteGroup, GroupError};
use crate::rational::{is_nonnegative, to_f64, Rational};

/// Upper bound on enumerated words, `|G|^L ≤ 2^24`.
pub const STATE_LIMIT: usize = 1 << 24;
/// Cap on hidden states of a finite-state representation.
pub const HIDDEN_STATE_LIMIT: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolicError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("window is out of range: {0}")]
    WindowOutOfRange(String),
    #[error("depth limit exceeded: {states} words exceeds {limit}")]
    DepthLimitExceeded { states: u128, limit: usize },
    #[error("measures live on different shift systems")]
    SystemMismatch,
    #[error("transition row {0} is not a probability vector")]
    RowNotStochastic(usize),
    #[error("initial distribution is not stationary for the transition matrix")]
    NotStationary,
    #[error("transition matrix has no unique stationary distribution; give one explicitly")]
    StationaryNotUnique,
    #[error("periodic point must be a nonempty word")]
    EmptyWord,
    #[error("symbol {0} is not in the alphabet")]
    SymbolOutOfRange(usize),
    #[error("mixture weights must be positive and sum to 1")]
    BadWeights,
    #[error("unsupported measure kind: {0}")]
    UnsupportedKind(String),
    #[error("operation needs a one-sided system")]
    NotOneSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sidedness {
    OneSided,
    TwoSided,
}

/// `Shift` is `T(x)_i = x_{i+1}`; `AffineShift(c)` is `T(x)_i = c·x_{i+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftMap {
    Shift,
    AffineShift(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftSystem {
    alphabet: FiniteGroup,
    sidedness: Sidedness,
    map: ShiftMap,
}

impl ShiftSystem {
    pub fn one_sided(alphabet: &FiniteGroup) -> Self {
        ShiftSystem { alphabet: alphabet.clone(), sidedness: Sidedness::OneSided, map: ShiftMap::Shift }
    }

    pub fn two_sided(alphabet: &FiniteGroup) -> Self {
        ShiftSystem { alphabet: alphabet.clone(), sidedness: Sidedness::TwoSided, map: ShiftMap::Shift }
    }

    /// Same carrier with the map replaced by `x ↦ c·σ(x)`. The identity
    /// translation gives back the plain shift.
    pub fn with_affine(&self, c: usize) -> Result<Self, SymbolicError> {
        if c >= self.alphabet.order() {
            return Err(SymbolicError::SymbolOutOfRange(c));
        }
        let map = if c == self.alphabet.identity() { ShiftMap::Shift } else { ShiftMap::AffineShift(c) };
        Ok(ShiftSystem { map, ..self.clone() })
    }

    pub fn alphabet(&self) -> &FiniteGroup {
        &self.alphabet
    }

    pub fn sidedness(&self) -> Sidedness {
        self.sidedness
    }

    pub fn map(&self) -> ShiftMap {
        self.map
    }

    fn translation(&self) -> usize {
        match self.map {
            ShiftMap::Shift => self.alphabet.identity(),
            ShiftMap::AffineShift(c) => c,
        }
    }

    /// Applies the map to a finite window `x_0..x_{n-1}`, giving the
    /// `n - 1` coordinates of the image that the window determines.
    pub fn apply(&self, x: &[usize]) -> Vec<usize> {
        let c = self.translation();
        x.iter().skip(1).map(|&s| self.alphabet.op(c, s)).collect()
    }
}

/// A cylinder `{x : x_{start+i} = symbols[i]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub start: i64,
    pub symbols: Vec<usize>,
}

impl Window {
    pub fn new(start: i64, symbols: Vec<usize>) -> Self {
        Window { start, symbols }
    }

    pub fn at_origin(symbols: Vec<usize>) -> Self {
        Window { start: 0, symbols }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovChain {
    transition: Vec<Vec<Rational>>,
    initial: Vec<Rational>,
    stationary: bool,
}

impl MarkovChain {
    pub fn transition(&self) -> &[Vec<Rational>] {
        &self.transition
    }

    pub fn initial(&self) -> &[Rational] {
        &self.initial
    }

    pub fn is_stationary(&self) -> bool {
        self.stationary
    }

    fn step(&self, dist: &[Rational]) -> Vec<Rational> {
        let n = dist.len();
        let mut out = vec![Rational::zero(); n];
        for (i, d) in dist.iter().enumerate().filter(|(_, d)| !d.is_zero()) {
            for j in 0..n {
                out[j] += d * &self.transition[i][j];
            }
        }
        out
    }

    /// Transition graph restricted to states with positive initial mass,
    /// as adjacency lists.
    pub fn support_graph(&self) -> Vec<Vec<usize>> {
        let n = self.initial.len();
        (0..n)
            .map(|i| {
                if self.initial[i].is_zero() {
                    Vec::new()
                } else {
                    (0..n).filter(|&j| !self.transition[i][j].is_zero() && !self.initial[j].is_zero()).collect()
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureKind {
    Bernoulli(DenseMeasure),
    Markov(MarkovChain),
    /// Uniform measure on the shift orbit of the periodic point `w^∞`;
    /// `w` is stored as its primitive root.
    PeriodicOrbit(Vec<usize>),
    Mixture(Vec<(Rational, ShiftMeasure)>),
    Convolution(Box<ShiftMeasure>, Box<ShiftMeasure>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftMeasure {
    system: ShiftSystem,
    kind: MeasureKind,
}

fn check_probability_vector(v: &[Rational]) -> bool {
    v.iter().all(is_nonnegative) && v.iter().sum::<Rational>().is_one()
}

impl ShiftMeasure {
    pub fn bernoulli(system: &ShiftSystem, marginal: DenseMeasure) -> Result<Self, SymbolicError> {
        if marginal.group() != system.alphabet() {
            return Err(GroupError::GroupMismatch.into());
        }
        Ok(ShiftMeasure { system: system.clone(), kind: MeasureKind::Bernoulli(marginal) })
    }

    /// Bernoulli measure from rational weights.
    pub fn bernoulli_weights(system: &ShiftSystem, weights: Vec<Rational>) -> Result<Self, SymbolicError> {
        let marginal = DenseMeasure::new(system.alphabet(), weights)?;
        Self::bernoulli(system, marginal)
    }

    /// Haar measure of the shift group: the uniform Bernoulli measure.
    pub fn haar(system: &ShiftSystem) -> Self {
        ShiftMeasure { system: system.clone(), kind: MeasureKind::Bernoulli(finite_group::haar(system.alphabet())) }
    }

    /// Stationary Markov measure. With `initial = None` the stationary
    /// distribution is solved for exactly and must be unique.
    pub fn markov(
        system: &ShiftSystem,
        transition: Vec<Vec<Rational>>,
        initial: Option<Vec<Rational>>,
    ) -> Result<Self, SymbolicError> {
        let n = system.alphabet().order();
        check_transition(&transition, n)?;
        let initial = match initial {
            Some(init) => {
                if init.len() != n || !check_probability_vector(&init) {
                    return Err(GroupError::NotNormalized(format!("initial distribution {init:?}")).into());
                }
                init
            }
            None => stationary_distribution(&transition).ok_or(SymbolicError::StationaryNotUnique)?,
        };
        let chain = MarkovChain { transition, initial, stationary: true };
        if chain.step(&chain.initial) != chain.initial {
            return Err(SymbolicError::NotStationary);
        }
        Ok(ShiftMeasure { system: system.clone(), kind: MeasureKind::Markov(chain) })
    }

    /// Markov measure without the stationarity check; only meaningful on
    /// one-sided systems, where the chain starts at time 0. Such a measure
    /// is generally not shift-invariant.
    pub fn markov_unchecked(
        system: &ShiftSystem,
        transition: Vec<Vec<Rational>>,
        initial: Vec<Rational>,
    ) -> Result<Self, SymbolicError> {
        let n = system.alphabet().order();
        check_transition(&transition, n)?;
        if system.sidedness() != Sidedness::OneSided {
            return Err(SymbolicError::NotOneSided);
        }
        if initial.len() != n || !check_probability_vector(&initial) {
            return Err(GroupError::NotNormalized(format!("initial distribution {initial:?}")).into());
        }
        let mut chain = MarkovChain { transition, initial, stationary: false };
        chain.stationary = chain.step(&chain.initial) == chain.initial;
        Ok(ShiftMeasure { system: system.clone(), kind: MeasureKind::Markov(chain) })
    }

    /// Orbit measure of the periodic point `word^∞`. Non-primitive words
    /// (`0101`) are reduced to their primitive root (`01`).
    pub fn periodic(system: &ShiftSystem, word: Vec<usize>) -> Result<Self, SymbolicError> {
        if word.is_empty() {
            return Err(SymbolicError::EmptyWord);
        }
        if let Some(&s) = word.iter().find(|&&s| s >= system.alphabet().order()) {
            return Err(SymbolicError::SymbolOutOfRange(s));
        }
        let p = word.len();
        let period = (1..=p).find(|&d| p.is_multiple_of(d) && (0..p).all(|i| word[i] == word[i % d])).unwrap();
        Ok(ShiftMeasure { system: system.clone(), kind: MeasureKind::PeriodicOrbit(word[..period].to_vec()) })
    }

    /// Point mass on the constant sequence `g g g …`.
    pub fn constant(system: &ShiftSystem, g: usize) -> Result<Self, SymbolicError> {
        Self::periodic(system, vec![g])
    }

    pub fn mixture(components: Vec<(Rational, ShiftMeasure)>) -> Result<Self, SymbolicError> {
        let first = components.first().ok_or(SymbolicError::BadWeights)?;
        let system = first.1.system.clone();
        if components.iter().any(|(_, m)| m.system != system) {
            return Err(SymbolicError::SystemMismatch);
        }
        let total: Rational = components.iter().map(|(w, _)| w.clone()).sum();
        if components.iter().any(|(w, _)| *w <= Rational::zero()) || !total.is_one() {
            return Err(SymbolicError::BadWeights);
        }
        Ok(ShiftMeasure { system, kind: MeasureKind::Mixture(components) })
    }

    /// The unsimplified convolution, evaluated lazily from its factors.
    pub fn lazy_convolution(left: &ShiftMeasure, right: &ShiftMeasure) -> Result<Self, SymbolicError> {
        if left.system != right.system {
            return Err(SymbolicError::SystemMismatch);
        }
        Ok(ShiftMeasure {
            system: left.system.clone(),
            kind: MeasureKind::Convolution(Box::new(left.clone()), Box::new(right.clone())),
        })
    }

    pub fn system(&self) -> &ShiftSystem {
        &self.system
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn alphabet(&self) -> &FiniteGroup {
        self.system.alphabet()
    }

    /// Same measure viewed on a system with a different map (the carrier
    /// must match).
    pub fn on_system(&self, system: &ShiftSystem) -> Result<Self, SymbolicError> {
        if system.alphabet() != self.alphabet() || system.sidedness() != self.system.sidedness() {
            return Err(SymbolicError::SystemMismatch);
        }
        let kind =
            match &self.kind {
                MeasureKind::Mixture(cs) => MeasureKind::Mixture(
                    cs.iter()
                        .map(|(w, m)| Ok((w.clone(), m.on_system(system)?)))
                        .collect::<Result<_, SymbolicError>>()?,
                ),
                MeasureKind::Convolution(a, b) => {
                    MeasureKind::Convolution(Box::new(a.on_system(system)?), Box::new(b.on_system(system)?))
                }
                k => k.clone(),
            };
        Ok(ShiftMeasure { system: system.clone(), kind })
    }

    /// True unless a non-stationary Markov chain appears anywhere inside.
    pub fn is_stationary_by_construction(&self) -> bool {
        match &self.kind {
            MeasureKind::Markov(c) => c.stationary,
            MeasureKind::Mixture(cs) => cs.iter().all(|(_, m)| m.is_stationary_by_construction()),
            MeasureKind::Convolution(a, b) => a.is_stationary_by_construction() && b.is_stationary_by_construction(),
            _ => true,
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            MeasureKind::Bernoulli(p) => {
                format!("Bernoulli({})", p.weights().iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","))
            }
            MeasureKind::Markov(c) => format!(
                "Markov[{}]",
                c.transition
                    .iter()
                    .map(|row| row.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","))
                    .collect::<Vec<_>>()
                    .join(";")
            ),
            MeasureKind::PeriodicOrbit(w) => format!("PeriodicOrbit({})", format_word(w, self.alphabet().order())),
            MeasureKind::Mixture(cs) => format!(
                "Mixture({})",
                cs.iter().map(|(w, m)| format!("{w}*{}", m.describe())).collect::<Vec<_>>().join(" + ")
            ),
            MeasureKind::Convolution(a, b) => format!("({} * {})", a.describe(), b.describe()),
        }
    }
}

fn check_transition(transition: &[Vec<Rational>], n: usize) -> Result<(), SymbolicError> {
    if transition.len() != n {
        return Err(SymbolicError::RowNotStochastic(transition.len().min(n)));
    }
    for (i, row) in transition.iter().enumerate() {
        if row.len() != n || !check_probability_vector(row) {
            return Err(SymbolicError::RowNotStochastic(i));
        }
    }
    Ok(())
}

/// Exact solution of `πP = π, Σπ = 1` by Gaussian elimination; `None`
/// when the solution is not unique.
pub fn stationary_distribution(transition: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let n = transition.len();
    // rows: (P^T - I) π = 0 for j < n-1, last row Σπ = 1
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|j| {
            let mut row: Vec<Rational> = (0..n)
                .map(|i| {
                    let mut v = transition[i][j].clone();
                    if i == j {
                        v -= Rational::one();
                    }
                    v
                })
                .collect();
            row.push(Rational::zero());
            row
        })
        .collect();
    a.push((0..n).map(|_| Rational::one()).chain(std::iter::once(Rational::one())).collect());
    // n+1 equations, n unknowns; row-reduce and check rank n
    let rows = n + 1;
    let mut pivot_row = 0;
    for col in 0..n {
        let p = (pivot_row..rows).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot_row, p);
        let inv = Rational::one() / &a[pivot_row][col];
        for k in col..=n {
            a[pivot_row][k] = &a[pivot_row][k] * &inv;
        }
        for r in 0..rows {
            if r != pivot_row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for k in col..=n {
                    let v = &f * &a[pivot_row][k];
                    a[r][k] -= v;
                }
            }
        }
        pivot_row += 1;
    }
    // remaining row must be consistent (0 = 0)
    if (pivot_row..rows).any(|r| !a[r][n].is_zero()) {
        return None;
    }
    let pi: Vec<Rational> = (0..n).map(|i| a[i][n].clone()).collect();
    pi.iter().all(is_nonnegative).then_some(pi)
}

pub fn encode(word: &[usize], n: usize) -> usize {
    word.iter().fold(0, |acc, &s| acc * n + s)
}

pub fn decode(code: usize, n: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    let mut c = code;
    for i in (0..len).rev() {
        out[i] = c % n;
        c /= n;
    }
    out
}

/// `n^len`, or `DepthLimitExceeded` beyond [`STATE_LIMIT`].
pub fn word_count(n: usize, len: usize) -> Result<usize, SymbolicError> {
    let states = (n as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
    if states > STATE_LIMIT as u128 {
        return Err(SymbolicError::DepthLimitExceeded { states, limit: STATE_LIMIT });
    }
    Ok(states as usize)
}

/// Exact distribution of `x_0..x_{len-1}` as a dense vector indexed by
/// word code.
pub fn block_distribution(mu: &ShiftMeasure, len: usize) -> Result<Vec<Rational>, SymbolicError> {
    let n = mu.alphabet().order();
    let count = word_count(n, len)?;
    let out = match &mu.kind {
        MeasureKind::Bernoulli(p) => {
            let mut dist = vec![Rational::one()];
            for _ in 0..len {
                let mut next = vec![Rational::zero(); dist.len() * n];
                for (c, d) in dist.iter().enumerate().filter(|(_, d)| !d.is_zero()) {
                    for g in 0..n {
                        next[c * n + g] = d * p.weight(g);
                    }
                }
                dist = next;
            }
            dist
        }
        MeasureKind::Markov(chain) => {
            if len == 0 {
                return Ok(vec![Rational::one()]);
            }
            let mut dist = chain.initial.clone();
            for _ in 1..len {
                let mut next = vec![Rational::zero(); dist.len() * n];
                for (c, d) in dist.iter().enumerate().filter(|(_, d)| !d.is_zero()) {
                    let last = c % n;
                    for g in 0..n {
                        let t = &chain.transition[last][g];
                        if !t.is_zero() {
                            next[c * n + g] = d * t;
                        }
                    }
                }
                dist = next;
            }
            dist
        }
        MeasureKind::PeriodicOrbit(w) => {
            let p = w.len();
            let share = Rational::new(1.into(), p.into());
            let mut dist = vec![Rational::zero(); count];
            for phase in 0..p {
                let word: Vec<usize> = (0..len).map(|i| w[(phase + i) % p]).collect();
                dist[encode(&word, n)] += &share;
            }
            dist
        }
        MeasureKind::Mixture(cs) => {
            let mut dist = vec![Rational::zero(); count];
            for (weight, m) in cs {
                for (acc, d) in dist.iter_mut().zip(block_distribution(m, len)?) {
                    if !d.is_zero() {
                        *acc += weight * d;
                    }
                }
            }
            dist
        }
        MeasureKind::Convolution(a, b) => {
            let g = mu.alphabet();
            let left = sparse(block_distribution(a, len)?, n, len);
            let right = sparse(block_distribution(b, len)?, n, len);
            let mut dist = vec![Rational::zero(); count];
            for (u, pu) in &left {
                for (v, pv) in &right {
                    let code = u.iter().zip(v).fold(0, |acc, (&x, &y)| acc * n + g.op(x, y));
                    dist[code] += pu * pv;
                }
            }
            dist
        }
    };
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

fn sparse(dist: Vec<Rational>, n: usize, len: usize) -> Vec<(Vec<usize>, Rational)> {
    dist.into_iter().enumerate().filter(|(_, p)| !p.is_zero()).map(|(c, p)| (decode(c, n, len), p)).collect()
}

/// Drops the last symbol: distribution of the length `len - 1` prefixes.
pub fn marginalize_last(dist: &[Rational], n: usize) -> Vec<Rational> {
    dist.chunks(n).map(|c| c.iter().sum()).collect()
}

fn check_window(mu: &ShiftMeasure, w: &Window) -> Result<(), SymbolicError> {
    if mu.system.sidedness() == Sidedness::OneSided && w.start < 0 {
        return Err(SymbolicError::WindowOutOfRange(format!("start {} on a one-sided system", w.start)));
    }
    if let Some(&s) = w.symbols.iter().find(|&&s| s >= mu.alphabet().order()) {
        return Err(SymbolicError::SymbolOutOfRange(s));
    }
    Ok(())
}

/// Exact probability of a cylinder set.
pub fn cylinder_prob(mu: &ShiftMeasure, w: &Window) -> Result<Rational, SymbolicError> {
    check_window(mu, w)?;
    cylinder(mu, w.start, &w.symbols)
}

fn cylinder(mu: &ShiftMeasure, start: i64, word: &[usize]) -> Result<Rational, SymbolicError> {
    let n = mu.alphabet().order();
    Ok(match &mu.kind {
        MeasureKind::Bernoulli(p) => word.iter().map(|&s| p.weight(s).clone()).product(),
        MeasureKind::Markov(chain) => {
            if word.is_empty() {
                return Ok(Rational::one());
            }
            let mut dist = chain.initial.clone();
            if !chain.stationary {
                for _ in 0..start.max(0) {
                    dist = chain.step(&dist);
                }
            }
            let mut p = dist[word[0]].clone();
            for pair in word.windows(2) {
                if p.is_zero() {
                    break;
                }
                p *= &chain.transition[pair[0]][pair[1]];
            }
            p
        }
        MeasureKind::PeriodicOrbit(point) => {
            let p = point.len() as i64;
            let hits = (0..p)
                .filter(|&phase| {
                    word.iter().enumerate().all(|(i, &s)| point[(phase + start + i as i64).rem_euclid(p) as usize] == s)
                })
                .count();
            Rational::new(hits.into(), (p as usize).into())
        }
        MeasureKind::Mixture(cs) => {
            let mut total = Rational::zero();
            for (weight, m) in cs {
                total += weight * cylinder(m, start, word)?;
            }
            total
        }
        MeasureKind::Convolution(a, b) => {
            // (μ*ν)([w]) = Σ_u μ([u])·ν([u⁻¹w]), with (u⁻¹w)_i = u_i⁻¹·w_i
            let g = mu.alphabet();
            let total_words = word_count(n, word.len())?;
            let mut total = Rational::zero();
            let mut rest = vec![0usize; word.len()];
            for code in 0..total_words {
                let u = decode(code, n, word.len());
                let pu = cylinder(a, start, &u)?;
                if pu.is_zero() {
                    continue;
                }
                for i in 0..word.len() {
                    rest[i] = g.op(g.inv(u[i]), word[i]);
                }
                let pv = cylinder(b, start, &rest)?;
                if !pv.is_zero() {
                    total += pu * pv;
                }
            }
            total
        }
    })
}

/// Convolution of shift measures. Bernoulli pairs collapse to the
/// Bernoulli measure of the convolved marginals and mixtures distribute;
/// every other pair stays a lazy [`MeasureKind::Convolution`].
pub fn convolve_shift(mu: &ShiftMeasure, nu: &ShiftMeasure) -> Result<ShiftMeasure, SymbolicError> {
    if mu.system != nu.system {
        return Err(SymbolicError::SystemMismatch);
    }
    match (&mu.kind, &nu.kind) {
        (MeasureKind::Bernoulli(p), MeasureKind::Bernoulli(q)) => {
            ShiftMeasure::bernoulli(&mu.system, finite_group::convolve(p, q)?)
        }
        (MeasureKind::Mixture(cs), _) => ShiftMeasure::mixture(
            cs.iter().map(|(w, m)| Ok((w.clone(), convolve_shift(m, nu)?))).collect::<Result<_, SymbolicError>>()?,
        ),
        (_, MeasureKind::Mixture(cs)) => ShiftMeasure::mixture(
            cs.iter().map(|(w, m)| Ok((w.clone(), convolve_shift(mu, m)?))).collect::<Result<_, SymbolicError>>()?,
        ),
        _ => ShiftMeasure::lazy_convolution(mu, nu),
    }
}

/// Checks `μ(T⁻¹[w]) = μ([w])` for every word of length `1..=depth`,
/// where `T` is the system's map. `T⁻¹[w]` at the origin is the union over
/// first symbols `g` of `[g·(c⁻¹w)]`.
pub fn is_shift_invariant(mu: &ShiftMeasure, depth: usize) -> Result<bool, SymbolicError> {
    Ok(first_invariance_failure(mu, depth)?.is_none())
}

/// The first window (shortest, then lexicographic) where invariance fails.
pub fn first_invariance_failure(mu: &ShiftMeasure, depth: usize) -> Result<Option<Window>, SymbolicError> {
    let g = mu.alphabet();
    let n = g.order();
    let c_inv = g.inv(mu.system.translation());
    let mut blocks = vec![block_distribution(mu, depth + 1)?];
    for _ in 0..=depth {
        let next = marginalize_last(blocks.last().unwrap(), n);
        blocks.push(next);
    }
    blocks.reverse(); // blocks[len] = distribution of length len
    for len in 1..=depth {
        let stride = word_count(n, len)?;
        for code in 0..stride {
            let w = decode(code, n, len);
            let pulled: Vec<usize> = w.iter().map(|&s| g.op(c_inv, s)).collect();
            let tail = encode(&pulled, n);
            let pre: Rational = (0..n).map(|first| &blocks[len + 1][first * stride + tail]).sum();
            if pre != blocks[len][code] {
                return Ok(Some(Window::at_origin(w)));
            }
        }
    }
    Ok(None)
}

/// Precomputed sampling tables for a measure.
#[derive(Clone, Debug)]
pub enum Sampler {
    Bernoulli(Vec<f64>),
    Markov { initial: Vec<f64>, rows: Vec<Vec<f64>> },
    Periodic(Vec<usize>),
    Mixture { cumulative: Vec<f64>, components: Vec<Sampler> },
    Convolution { group: FiniteGroup, left: Box<Sampler>, right: Box<Sampler> },
}

fn cumulative(weights: &[Rational]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += to_f64(w);
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = f64::INFINITY;
    }
    out
}

fn draw(cum: &[f64], u: f64) -> usize {
    cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1)
}

impl Sampler {
    pub fn new(mu: &ShiftMeasure) -> Self {
        match &mu.kind {
            MeasureKind::Bernoulli(p) => Sampler::Bernoulli(cumulative(p.weights())),
            MeasureKind::Markov(c) => Sampler::Markov {
                initial: cumulative(&c.initial),
                rows: c.transition.iter().map(|r| cumulative(r)).collect(),
            },
            MeasureKind::PeriodicOrbit(w) => Sampler::Periodic(w.clone()),
            MeasureKind::Mixture(cs) => Sampler::Mixture {
                cumulative: cumulative(&cs.iter().map(|(w, _)| w.clone()).collect::<Vec<_>>()),
                components: cs.iter().map(|(_, m)| Sampler::new(m)).collect(),
            },
            MeasureKind::Convolution(a, b) => Sampler::Convolution {
                group: mu.alphabet().clone(),
                left: Box::new(Sampler::new(a)),
                right: Box::new(Sampler::new(b)),
            },
        }
    }

    /// Writes `x_0..x_{out.len()-1}` into `out`.
    pub fn fill<R: Rng>(&self, rng: &mut R, out: &mut [usize]) {
        match self {
            Sampler::Bernoulli(cum) => {
                for x in out.iter_mut() {
                    *x = draw(cum, rng.gen());
                }
            }
            Sampler::Markov { initial, rows } => {
                let mut s = draw(initial, rng.gen());
                for (i, x) in out.iter_mut().enumerate() {
                    if i > 0 {
                        s = draw(&rows[s], rng.gen());
                    }
                    *x = s;
                }
            }
            Sampler::Periodic(w) => {
                let p = w.len();
                let phase = rng.gen_range(0..p);
                for (i, x) in out.iter_mut().enumerate() {
                    *x = w[(phase + i) % p];
                }
            }
            Sampler::Mixture { cumulative, components } => {
                components[draw(cumulative, rng.gen())].fill(rng, out);
            }
            Sampler::Convolution { group, left, right } => {
                left.fill(rng, out);
                let mut other = vec![0; out.len()];
                right.fill(rng, &mut other);
                for (x, y) in out.iter_mut().zip(other) {
                    *x = group.op(*x, y);
                }
            }
        }
    }
}

/// A word of length `n` drawn from `μ`; deterministic in `seed`.
pub fn sample(mu: &ShiftMeasure, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0; n];
    Sampler::new(mu).fill(&mut rng, &mut out);
    out
}

/// Two-sided stationary measure with the same finite-dimensional
/// marginals, realizing the inverse limit of the one-sided system.
pub fn natural_extension(mu: &ShiftMeasure) -> Result<ShiftMeasure, SymbolicError> {
    if mu.system.sidedness() != Sidedness::OneSided {
        return Err(SymbolicError::NotOneSided);
    }
    let system = ShiftSystem { sidedness: Sidedness::TwoSided, ..mu.system.clone() };
    extend(mu, &system)
}

fn extend(mu: &ShiftMeasure, system: &ShiftSystem) -> Result<ShiftMeasure, SymbolicError> {
    let kind = match &mu.kind {
        MeasureKind::Markov(c) if !c.stationary => {
            return Err(SymbolicError::UnsupportedKind("non-stationary Markov chain has no extension".into()))
        }
        MeasureKind::Mixture(cs) => MeasureKind::Mixture(
            cs.iter().map(|(w, m)| Ok((w.clone(), extend(m, system)?))).collect::<Result<_, SymbolicError>>()?,
        ),
        MeasureKind::Convolution(a, b) => {
            return convolve_shift(&extend(a, system)?, &extend(b, system)?);
        }
        k => k.clone(),
    };
    Ok(ShiftMeasure { system: system.clone(), kind })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionReport {
    pub pass: bool,
    pub windows_checked: usize,
    /// A two-sided window whose probability differs from the one-sided
    /// marginal of the same word.
    pub witness: Option<Window>,
}

/// Compares every two-sided window of length `1..=depth` starting at
/// `-len..=1` with the one-sided marginal at the origin. Agreement across
/// starts is two-sided shift invariance; agreement with the one-sided
/// measure is marginal consistency.
pub fn verify_extension(mu: &ShiftMeasure, depth: usize) -> Result<ExtensionReport, SymbolicError> {
    let ext = natural_extension(mu)?;
    let n = mu.alphabet().order();
    let mut checked = 0;
    for len in 1..=depth {
        let one_sided = block_distribution(mu, len)?;
        for (code, p) in one_sided.iter().enumerate() {
            let w = decode(code, n, len);
            for start in -(len as i64)..=1 {
                checked += 1;
                let window = Window::new(start, w.clone());
                if cylinder_prob(&ext, &window)? != *p {
                    return Ok(ExtensionReport { pass: false, windows_checked: checked, witness: Some(window) });
                }
            }
        }
    }
    Ok(ExtensionReport { pass: true, windows_checked: checked, witness: None })
}

/// Finite-state representation: a stationary Markov chain of hidden
/// states, each emitting one symbol per step from its own distribution,
/// independently given the state path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiddenChain {
    pub initial: Vec<Rational>,
    /// Sparse rows `(next state, probability)`.
    pub transition: Vec<Vec<(usize, Rational)>>,
    pub emission: Vec<DenseMeasure>,
}

impl HiddenChain {
    pub fn states(&self) -> usize {
        self.initial.len()
    }

    /// Forward recursion for the probability of `word` at the origin.
    pub fn word_probability(&self, word: &[usize]) -> Rational {
        let mut alpha = self.initial.clone();
        for (i, &s) in word.iter().enumerate() {
            for (a, e) in alpha.iter_mut().zip(&self.emission) {
                *a *= e.weight(s);
            }
            if i + 1 < word.len() {
                let mut next = vec![Rational::zero(); alpha.len()];
                for (from, a) in alpha.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
                    for (to, t) in &self.transition[from] {
                        next[*to] += a * t;
                    }
                }
                alpha = next;
            }
        }
        alpha.into_iter().sum()
    }
}

/// Hidden-state representation of `μ`, or `None` when the state space
/// would exceed [`HIDDEN_STATE_LIMIT`]. Bernoulli has one state, Markov
/// its alphabet, periodic orbits their phases; mixtures take disjoint
/// unions and convolutions product chains with convolved emissions.
pub fn hidden_chain(mu: &ShiftMeasure) -> Option<HiddenChain> {
    let g = mu.alphabet();
    let chain = match &mu.kind {
        MeasureKind::Bernoulli(p) => HiddenChain {
            initial: vec![Rational::one()],
            transition: vec![vec![(0, Rational::one())]],
            emission: vec![p.clone()],
        },
        MeasureKind::Markov(c) => HiddenChain {
            initial: c.initial.clone(),
            transition: c
                .transition
                .iter()
                .map(|row| row.iter().cloned().enumerate().filter(|(_, t)| !t.is_zero()).collect())
                .collect(),
            emission: g.elements().map(|s| DenseMeasure::delta(g, s).expect("in range")).collect(),
        },
        MeasureKind::PeriodicOrbit(w) => {
            let p = w.len();
            HiddenChain {
                initial: vec![Rational::new(1.into(), p.into()); p],
                transition: (0..p).map(|i| vec![((i + 1) % p, Rational::one())]).collect(),
                emission: w.iter().map(|&s| DenseMeasure::delta(g, s).expect("in range")).collect(),
            }
        }
        MeasureKind::Mixture(cs) => {
            let parts: Vec<(Rational, HiddenChain)> =
                cs.iter().map(|(w, m)| hidden_chain(m).map(|h| (w.clone(), h))).collect::<Option<_>>()?;
            if parts.iter().map(|(_, h)| h.states()).sum::<usize>() > HIDDEN_STATE_LIMIT {
                return None;
            }
            let mut out = HiddenChain { initial: Vec::new(), transition: Vec::new(), emission: Vec::new() };
            for (w, h) in parts {
                let offset = out.initial.len();
                out.initial.extend(h.initial.iter().map(|p| &w * p));
                out.transition.extend(
                    h.transition.into_iter().map(|row| row.into_iter().map(|(j, t)| (j + offset, t)).collect()),
                );
                out.emission.extend(h.emission);
            }
            out
        }
        MeasureKind::Convolution(a, b) => {
            let (ha, hb) = (hidden_chain(a)?, hidden_chain(b)?);
            let (na, nb) = (ha.states(), hb.states());
            if na * nb > HIDDEN_STATE_LIMIT {
                return None;
            }
            let mut out = HiddenChain { initial: Vec::new(), transition: Vec::new(), emission: Vec::new() };
            for i in 0..na {
                for j in 0..nb {
                    out.initial.push(&ha.initial[i] * &hb.initial[j]);
                    let mut row = Vec::new();
                    for (ti, pi) in &ha.transition[i] {
                        for (tj, pj) in &hb.transition[j] {
                            row.push((ti * nb + tj, pi * pj));
                        }
                    }
                    out.transition.push(row);
                    out.emission.push(finite_group::convolve(&ha.emission[i], &hb.emission[j]).expect("same alphabet"));
                }
            }
            out
        }
    };
    Some(chain)
}

/// Text form of a word: one digit per symbol for alphabets of at most
/// ten letters, space-separated indices otherwise.
pub fn format_word(word: &[usize], alphabet_size: usize) -> String {
    if alphabet_size <= 10 {
        word.iter().map(|&s| char::from(b'0' + s as u8)).collect()
    } else {
        word.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
    }
}

/// Inverse of [`format_word`].
pub fn parse_word(text: &str, alphabet_size: usize) -> Result<Vec<usize>, SymbolicError> {
    let symbols: Vec<usize> = if alphabet_size <= 10 && !text.trim().contains(' ') {
        text.trim()
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize).ok_or(SymbolicError::SymbolOutOfRange(usize::MAX)))
            .collect::<Result<_, _>>()?
    } else {
        text.split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| SymbolicError::SymbolOutOfRange(usize::MAX)))
            .collect::<Result<_, _>>()?
    };
    if let Some(&s) = symbols.iter().find(|&&s| s >= alphabet_size) {
        return Err(SymbolicError::SymbolOutOfRange(s));
    }
    Ok(symbols)
}

/// Writes one word per line.
pub fn write_words<W: Write>(out: &mut W, words: &[Vec<usize>], alphabet_size: usize) -> io::Result<()> {
    for w in words {
        writeln!(out, "{}", format_word(w, alphabet_size))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::r;

    fn c2() -> FiniteGroup {
        FiniteGroup::cyclic(2).unwrap()
    }

    fn bern(sys: &ShiftSystem, p0: Rational) -> ShiftMeasure {
        let p1 = Rational::one() - &p0;
        ShiftMeasure::bernoulli_weights(sys, vec![p0, p1]).unwrap()
    }

    fn example_markov(sys: &ShiftSystem) -> ShiftMeasure {
        ShiftMeasure::markov(sys, vec![vec![r(2, 3), r(1, 3)], vec![r(1, 3), r(2, 3)]], None).unwrap()
    }

    #[test]
    fn cylinder_examples() {
        let sys = ShiftSystem::one_sided(&c2());
        let b = bern(&sys, r(3, 4));
        assert_eq!(cylinder_prob(&b, &Window::at_origin(vec![0, 1])).unwrap(), r(3, 16));
        let conv = ShiftMeasure::lazy_convolution(&b, &b).unwrap();
        assert_eq!(cylinder_prob(&conv, &Window::at_origin(vec![1])).unwrap(), r(3, 8));
        let per = ShiftMeasure::periodic(&sys, vec![0, 1]).unwrap();
        assert_eq!(cylinder_prob(&per, &Window::at_origin(vec![0, 1, 0])).unwrap(), r(1, 2));
        assert!(matches!(cylinder_prob(&b, &Window::new(-1, vec![0])), Err(SymbolicError::WindowOutOfRange(_))));
    }

    #[test]
    fn depth_guard() {
        let sys = ShiftSystem::one_sided(&c2());
        let b = bern(&sys, r(1, 2));
        assert!(matches!(block_distribution(&b, 25), Err(SymbolicError::DepthLimitExceeded { .. })));
        let conv = ShiftMeasure::lazy_convolution(&b, &b).unwrap();
        assert!(matches!(
            cylinder_prob(&conv, &Window::at_origin(vec![0; 30])),
            Err(SymbolicError::DepthLimitExceeded { .. })
        ));
    }

    #[test]
    fn convolve_shift_examples() {
        let sys = ShiftSystem::one_sided(&c2());
        let b = bern(&sys, r(3, 4));
        let bb = convolve_shift(&b, &b).unwrap();
        assert_eq!(bb, bern(&sys, r(5, 8)));
        let e = ShiftMeasure::constant(&sys, 0).unwrap();
        let eb = convolve_shift(&e, &b).unwrap();
        assert!(matches!(eb.kind(), MeasureKind::Convolution(..)));
        assert_eq!(block_distribution(&eb, 5).unwrap(), block_distribution(&b, 5).unwrap());
        let per = ShiftMeasure::periodic(&sys, vec![0, 1]).unwrap();
        let pb = convolve_shift(&per, &b).unwrap();
        assert_eq!(cylinder_prob(&pb, &Window::at_origin(vec![0])).unwrap(), r(1, 2));
        let other = ShiftSystem::two_sided(&c2());
        assert_eq!(convolve_shift(&b, &ShiftMeasure::haar(&other)), Err(SymbolicError::SystemMismatch));
    }

    #[test]
    fn mixtures_distribute_over_convolution() {
        let sys = ShiftSystem::one_sided(&c2());
        let mix = ShiftMeasure::mixture(vec![(r(1, 3), bern(&sys, r(1, 4))), (r(2, 3), bern(&sys, r(1, 2)))]).unwrap();
        let b = bern(&sys, r(1, 5));
        let conv = convolve_shift(&mix, &b).unwrap();
        assert!(matches!(conv.kind(), MeasureKind::Mixture(_)));
        let lazy = ShiftMeasure::lazy_convolution(&mix, &b).unwrap();
        assert_eq!(block_distribution(&conv, 4).unwrap(), block_distribution(&lazy, 4).unwrap());
    }

    #[test]
    fn invariance_examples() {
        let sys = ShiftSystem::one_sided(&c2());
        assert!(is_shift_invariant(&bern(&sys, r(1, 4)), 6).unwrap());
        let raw = ShiftMeasure::markov_unchecked(
            &sys,
            vec![vec![r(2, 3), r(1, 3)], vec![r(1, 3), r(2, 3)]],
            vec![r(1, 1), r(0, 1)],
        )
        .unwrap();
        assert!(!is_shift_invariant(&raw, 1).unwrap());
        assert_eq!(first_invariance_failure(&raw, 3).unwrap(), Some(Window::at_origin(vec![0])));
        let conv =
            convolve_shift(&example_markov(&sys), &ShiftMeasure::periodic(&sys, vec![0, 0, 1]).unwrap()).unwrap();
        assert!(is_shift_invariant(&conv, 8).unwrap());
    }

    #[test]
    fn markov_construction_errors() {
        let sys = ShiftSystem::one_sided(&c2());
        let bad_row = vec![vec![r(2, 3), r(1, 3)], vec![r(99, 100), r(0, 1)]];
        assert_eq!(ShiftMeasure::markov(&sys, bad_row, None), Err(SymbolicError::RowNotStochastic(1)));
        let p = vec![vec![r(2, 3), r(1, 3)], vec![r(1, 3), r(2, 3)]];
        assert_eq!(
            ShiftMeasure::markov(&sys, p.clone(), Some(vec![r(1, 1), r(0, 1)])),
            Err(SymbolicError::NotStationary)
        );
        let id = vec![vec![r(1, 1), r(0, 1)], vec![r(0, 1), r(1, 1)]];
        assert_eq!(ShiftMeasure::markov(&sys, id.clone(), None), Err(SymbolicError::StationaryNotUnique));
        assert!(ShiftMeasure::markov(&sys, id, Some(vec![r(1, 2), r(1, 2)])).is_ok());
    }

    #[test]
    fn stationary_solver() {
        let p = vec![vec![r(1, 2), r(1, 2), r(0, 1)], vec![r(0, 1), r(1, 3), r(2, 3)], vec![r(1, 1), r(0, 1), r(0, 1)]];
        let pi = stationary_distribution(&p).unwrap();
        let chain = MarkovChain { transition: p, initial: pi.clone(), stationary: true };
        assert_eq!(chain.step(&pi), pi);
        assert_eq!(pi.iter().sum::<Rational>(), r(1, 1));
    }

    #[test]
    fn periodic_words_reduce_to_primitive_root() {
        let sys = ShiftSystem::one_sided(&c2());
        let m = ShiftMeasure::periodic(&sys, vec![0, 1, 0, 1]).unwrap();
        assert_eq!(m.kind(), &MeasureKind::PeriodicOrbit(vec![0, 1]));
        assert_eq!(ShiftMeasure::periodic(&sys, vec![]), Err(SymbolicError::EmptyWord));
        assert_eq!(ShiftMeasure::periodic(&sys, vec![2]), Err(SymbolicError::SymbolOutOfRange(2)));
    }

    #[test]
    fn sampling_examples() {
        let sys = ShiftSystem::one_sided(&c2());
        let per = ShiftMeasure::periodic(&sys, vec![0, 1]).unwrap();
        for seed in 0..5 {
            let w = sample(&per, 20, seed);
            assert!(w.windows(2).all(|p| p[0] != p[1]));
        }
        let fair = bern(&sys, r(1, 2));
        let n = 1_000_000;
        let zeros = sample(&fair, n, 7).iter().filter(|&&s| s == 0).count() as f64 / n as f64;
        assert!((zeros - 0.5).abs() < 0.002, "{zeros}");
        assert_eq!(sample(&fair, 100, 3), sample(&fair, 100, 3));
    }

    #[test]
    fn convolution_sampler_matches_cylinders() {
        let sys = ShiftSystem::one_sided(&c2());
        let conv = convolve_shift(&bern(&sys, r(3, 4)), &ShiftMeasure::periodic(&sys, vec![0, 1]).unwrap()).unwrap();
        let n = 1_000_000;
        let w = sample(&conv, n + 2, 99);
        let exact = block_distribution(&conv, 3).unwrap();
        let mut counts = [0usize; 8];
        for win in w.windows(3) {
            counts[encode(win, 2)] += 1;
        }
        for (code, p) in exact.iter().enumerate() {
            let p = to_f64(p);
            let freq = counts[code] as f64 / n as f64;
            // overlapping windows: allow a variance inflation of 3
            let sigma = (3.0 * p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 3.0 * sigma, "code {code}: {freq} vs {p}");
        }
    }

    #[test]
    fn natural_extension_examples() {
        let sys = ShiftSystem::one_sided(&c2());
        let b = bern(&sys, r(1, 4));
        let eb = natural_extension(&b).unwrap();
        assert_eq!(eb.system().sidedness(), Sidedness::TwoSided);
        assert_eq!(
            cylinder_prob(&eb, &Window::new(-3, vec![1, 0, 1])).unwrap(),
            cylinder_prob(&b, &Window::at_origin(vec![1, 0, 1])).unwrap()
        );
        let c3 = FiniteGroup::cyclic(3).unwrap();
        let sys3 = ShiftSystem::one_sided(&c3);
        let p = vec![vec![r(1, 2), r(1, 4), r(1, 4)], vec![r(0, 1), r(1, 3), r(2, 3)], vec![r(1, 5), r(3, 5), r(1, 5)]];
        let m = ShiftMeasure::markov(&sys3, p.clone(), None).unwrap();
        let em = natural_extension(&m).unwrap();
        let MeasureKind::Markov(chain) = m.kind() else { unreachable!() };
        let (a, b_) = (1, 2);
        let expect = &chain.initial()[a] * &p[a][b_] * &p[b_][a];
        assert_eq!(cylinder_prob(&em, &Window::new(-2, vec![a, b_, a])).unwrap(), expect);
        assert!(verify_extension(&m, 6).unwrap().pass);
        assert!(verify_extension(&b, 6).unwrap().pass);
        assert_eq!(natural_extension(&em), Err(SymbolicError::NotOneSided));
    }

    #[test]
    fn natural_extension_of_convolution() {
        let sys = ShiftSystem::one_sided(&c2());
        let conv =
            convolve_shift(&example_markov(&sys), &ShiftMeasure::periodic(&sys, vec![0, 1, 1]).unwrap()).unwrap();
        assert!(verify_extension(&conv, 5).unwrap().pass);
    }

    #[test]
    fn affine_shift_preserves_haar_only() {
        let c3 = FiniteGroup::cyclic(3).unwrap();
        let sys = ShiftSystem::one_sided(&c3).with_affine(1).unwrap();
        assert_eq!(sys.map(), ShiftMap::AffineShift(1));
        assert!(is_shift_invariant(&ShiftMeasure::haar(&sys), 6).unwrap());
        let skewed = ShiftMeasure::bernoulli_weights(&sys, vec![r(1, 2), r(1, 3), r(1, 6)]).unwrap();
        assert!(!is_shift_invariant(&skewed, 1).unwrap());
        assert_eq!(ShiftSystem::one_sided(&c3).with_affine(0).unwrap().map(), ShiftMap::Shift);
        assert_eq!(sys.apply(&[0, 1, 2]), vec![2, 0]);
    }

    #[test]
    fn hidden_chain_forward_matches_cylinders() {
        let sys = ShiftSystem::one_sided(&c2());
        let conv =
            ShiftMeasure::lazy_convolution(&example_markov(&sys), &ShiftMeasure::periodic(&sys, vec![0, 1]).unwrap())
                .unwrap();
        let h = hidden_chain(&conv).unwrap();
        assert_eq!(h.states(), 4);
        for code in 0..32 {
            let w = decode(code, 2, 5);
            assert_eq!(h.word_probability(&w), cylinder_prob(&conv, &Window::at_origin(w.clone())).unwrap());
        }
    }

    #[test]
    fn words_round_trip_as_text() {
        let mut buf = Vec::new();
        write_words(&mut buf, &[vec![0, 1, 1], vec![1, 0]], 2).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "011\n10\n");
        assert_eq!(parse_word("011", 2).unwrap(), vec![0, 1, 1]);
        assert_eq!(format_word(&[11, 3], 12), "11 3");
        assert_eq!(parse_word("11 3", 12).unwrap(), vec![11, 3]);
    }
}
