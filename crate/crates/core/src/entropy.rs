//! Shannon, block and conditional block entropies (in nats), entropy-rate
//! estimates for shift measures, and plug-in estimates from sampled words.
//!
//! Probabilities stay exact until the logarithm; every float sum runs in a
//! fixed order through [`compensated_sum`], so results are bitwise
//! reproducible.

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::finite_group::DenseMeasure;
use crate::rational::{compensated_sum, to_f64, Rational};
use crate::symbolic::{self, hidden_chain, marginalize_last, MeasureKind, ShiftMeasure, SymbolicError};

/// Slack allowed on `h_L ≤ h_{L-1}` for exact inputs.
pub const MONOTONICITY_SLACK: f64 = 1e-12;
/// Cap on `|G|^L · states²` for the hidden-state lower bound.
const LOWER_BOUND_WORK_LIMIT: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("h_{len} = {next} exceeds h_{prev_len} = {prev}", prev_len = len - 1)]
    MonotonicityViolated { len: usize, prev: f64, next: f64 },
    #[error("no closed form for {0}")]
    UnsupportedKind(String),
    #[error("partitions do not live on the same carrier")]
    PartitionMismatch,
    #[error("need at least {need} symbols, have {have}")]
    InsufficientData { have: usize, need: usize },
    #[error("depth must be at least 1")]
    InvalidDepth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    ClosedForm,
    BlockExact,
    /// Block estimate tightened by the bounds of a hidden-state
    /// representation.
    HiddenMarkovBounds,
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    /// `h_1, …, h_{L_max}`.
    pub upper_bounds: Vec<f64>,
    /// A certified lower bound on the entropy rate, when one is available.
    pub lower_bound: Option<f64>,
    pub method: EstimateMethod,
    pub l_max: usize,
    pub converged: bool,
    /// `|h_{L_max} - h_{L_max-1}|`.
    pub gap: f64,
    pub note: Option<String>,
}

/// Anything with exact length-`L` block distributions over a finite
/// alphabet.
pub trait BlockSource {
    fn alphabet_size(&self) -> usize;
    fn block_distribution(&self, len: usize) -> Result<Vec<Rational>, SymbolicError>;
}

impl BlockSource for ShiftMeasure {
    fn alphabet_size(&self) -> usize {
        self.alphabet().order()
    }

    fn block_distribution(&self, len: usize) -> Result<Vec<Rational>, SymbolicError> {
        symbolic::block_distribution(self, len)
    }
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// `-Σ p ln p` with `0 ln 0 = 0`.
pub fn shannon(weights: &[Rational]) -> f64 {
    compensated_sum(weights.iter().map(|w| plogp(to_f64(w))))
}

pub fn shannon_f64(weights: &[f64]) -> f64 {
    compensated_sum(weights.iter().map(|&w| plogp(w)))
}

pub fn static_entropy(mu: &DenseMeasure) -> f64 {
    shannon(mu.weights())
}

/// `H_L`, the entropy of the length-`L` cylinder distribution.
pub fn block_entropy<M: BlockSource>(m: &M, len: usize) -> Result<f64, EntropyError> {
    Ok(shannon(&m.block_distribution(len)?))
}

/// `-Σ_w P(w) ln(P(w) / P(prefix w))`, i.e. `H_L - H_{L-1}` without the
/// cancellation.
fn conditional_from(dist: &[Rational], prefix: &[Rational], n: usize) -> f64 {
    compensated_sum(dist.iter().enumerate().filter(|(_, p)| !p.is_zero()).map(|(code, p)| {
        let ratio = p / &prefix[code / n];
        -to_f64(p) * to_f64(&ratio).ln()
    }))
}

/// `h_L = H_L - H_{L-1}` with `H_0 = 0`.
pub fn conditional_block_entropy<M: BlockSource>(m: &M, len: usize) -> Result<f64, EntropyError> {
    if len == 0 {
        return Err(EntropyError::InvalidDepth);
    }
    let n = m.alphabet_size();
    let dist = m.block_distribution(len)?;
    let prefix = marginalize_last(&dist, n);
    Ok(conditional_from(&dist, &prefix, n))
}

/// `h_1, …, h_{L_max}` from one enumeration at `L_max`.
pub fn conditional_entropies<M: BlockSource>(m: &M, l_max: usize) -> Result<Vec<f64>, EntropyError> {
    if l_max == 0 {
        return Err(EntropyError::InvalidDepth);
    }
    let n = m.alphabet_size();
    let mut dists = vec![m.block_distribution(l_max)?];
    for _ in 0..l_max {
        let next = marginalize_last(dists.last().unwrap(), n);
        dists.push(next);
    }
    dists.reverse();
    Ok((1..=l_max).map(|len| conditional_from(&dists[len], &dists[len - 1], n)).collect())
}

fn check_monotone(hs: &[f64]) -> Result<(), EntropyError> {
    for (i, pair) in hs.windows(2).enumerate() {
        if pair[1] > pair[0] + MONOTONICITY_SLACK {
            return Err(EntropyError::MonotonicityViolated { len: i + 2, prev: pair[0], next: pair[1] });
        }
    }
    Ok(())
}

/// Block estimate `h_{L_max}` for any [`BlockSource`].
pub fn block_entropy_rate<M: BlockSource>(m: &M, l_max: usize, tol: f64) -> Result<EntropyEstimate, EntropyError> {
    let hs = conditional_entropies(m, l_max)?;
    check_monotone(&hs)?;
    let value = *hs.last().unwrap();
    let gap = if l_max >= 2 { (hs[l_max - 1] - hs[l_max - 2]).abs() } else { f64::INFINITY };
    Ok(EntropyEstimate {
        value,
        upper_bounds: hs,
        lower_bound: None,
        method: EstimateMethod::BlockExact,
        l_max,
        converged: gap < tol,
        gap,
        note: None,
    })
}

/// Entropy rate estimate for a shift measure.
///
/// The canonical estimate is `h_{L_max}`, a nonincreasing upper bound.
/// When the measure has a hidden-state representation two more bounds
/// are available: `H(Y_L | Y_1..Y_{L-1}, S_1)` from below, and
/// `h(S) + H(Y_0 | S_0)` (the entropy of the joint state/symbol process)
/// from above. If the latter beats `h_{L_max}` it becomes the value, and
/// convergence is judged on the width of the bracket as well as on the gap.
pub fn entropy_rate(mu: &ShiftMeasure, l_max: usize, tol: f64) -> Result<EntropyEstimate, EntropyError> {
    let mut est = block_entropy_rate(mu, l_max, tol)?;
    if !mu.is_stationary_by_construction() {
        return Ok(est);
    }
    if let Some((lower, upper)) = hidden_markov_bounds(mu, l_max) {
        let lower = lower.min(est.value);
        est.lower_bound = Some(lower);
        if upper < est.value - MONOTONICITY_SLACK {
            est.value = upper;
            est.method = EstimateMethod::HiddenMarkovBounds;
        }
        if est.value - lower < tol {
            est.converged = true;
        }
    }
    Ok(est)
}

/// `(lower, upper)` bounds on the entropy rate from the hidden-state
/// representation, or `None` when it is unavailable or too large.
pub fn hidden_markov_bounds(mu: &ShiftMeasure, len: usize) -> Option<(f64, f64)> {
    let chain = hidden_chain(mu)?;
    let n = mu.alphabet().order();
    let states = chain.states();
    let pi: Vec<f64> = chain.initial.iter().map(to_f64).collect();
    let rows: Vec<Vec<(usize, f64)>> =
        chain.transition.iter().map(|r| r.iter().map(|(j, t)| (*j, to_f64(t))).collect()).collect();
    let emit: Vec<Vec<f64>> = chain.emission.iter().map(|e| e.weights().iter().map(to_f64).collect()).collect();

    let upper = compensated_sum((0..states).filter(|&s| pi[s] > 0.0).map(|s| {
        let transition_entropy = compensated_sum(rows[s].iter().map(|&(_, t)| plogp(t)));
        pi[s] * (transition_entropy + shannon_f64(&emit[s]))
    }));

    let words = (n as u128).checked_pow(len as u32)?;
    if len == 0 || words * (states * states) as u128 > LOWER_BOUND_WORK_LIMIT as u128 {
        return Some((0.0, upper));
    }
    let mut lower_terms = Vec::new();
    for start in (0..states).filter(|&s| pi[s] > 0.0) {
        // alpha[code * states + s] = P(word, current state | S_1 = start)
        let mut alpha = vec![0.0; n * states];
        for y in 0..n {
            alpha[y * states + start] = emit[start][y];
        }
        let mut prev_totals: Vec<f64> = vec![1.0];
        for step in 1..=len {
            let totals: Vec<f64> = alpha.chunks(states).map(|c| c.iter().sum()).collect();
            if step == len {
                let h = compensated_sum(
                    totals
                        .iter()
                        .enumerate()
                        .filter(|(_, &p)| p > 0.0)
                        .map(|(code, &p)| -p * (p / prev_totals[code / n]).ln()),
                );
                lower_terms.push(pi[start] * h);
                break;
            }
            let mut next = vec![0.0; alpha.len() * n];
            for (code, cell) in alpha.chunks(states).enumerate() {
                for (s, &a) in cell.iter().enumerate().filter(|(_, &a)| a > 0.0) {
                    for &(t, p) in &rows[s] {
                        let w = a * p;
                        for y in 0..n {
                            let e = emit[t][y];
                            if e > 0.0 {
                                next[(code * n + y) * states + t] += w * e;
                            }
                        }
                    }
                }
            }
            prev_totals = totals;
            alpha = next;
        }
    }
    Some((compensated_sum(lower_terms), upper))
}

/// Closed-form entropy rate of a Bernoulli or stationary Markov measure.
pub fn closed_form_entropy(mu: &ShiftMeasure) -> Result<f64, EntropyError> {
    match mu.kind() {
        MeasureKind::Bernoulli(p) => Ok(static_entropy(p)),
        MeasureKind::Markov(chain) if chain.is_stationary() => Ok(compensated_sum(
            chain.initial().iter().zip(chain.transition()).map(|(pi, row)| to_f64(pi) * shannon(row)),
        )),
        _ => Err(EntropyError::UnsupportedKind(mu.describe())),
    }
}

/// A partition of a finite carrier `0..len` into labelled blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    blocks: usize,
}

impl Partition {
    /// Relabels blocks to `0..k` in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::BTreeMap::new();
        let labels: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Partition { blocks: map.len(), labels }
    }

    /// Blocks given as element lists; they must be disjoint and cover `0..size`.
    pub fn from_blocks(size: usize, blocks: &[Vec<usize>]) -> Result<Self, EntropyError> {
        let mut labels = vec![usize::MAX; size];
        for (b, block) in blocks.iter().enumerate() {
            for &x in block {
                if x >= size || labels[x] != usize::MAX {
                    return Err(EntropyError::PartitionMismatch);
                }
                labels[x] = b;
            }
        }
        if labels.contains(&usize::MAX) {
            return Err(EntropyError::PartitionMismatch);
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn trivial(size: usize) -> Self {
        Partition { labels: vec![0; size], blocks: usize::from(size > 0) }
    }

    pub fn discrete(size: usize) -> Self {
        Partition { labels: (0..size).collect(), blocks: size }
    }

    /// On words of length `len` over `n` letters: the partition by the
    /// symbol at position `i`.
    pub fn coordinate(n: usize, len: usize, i: usize) -> Self {
        let stride = n.pow((len - 1 - i) as u32);
        let labels: Vec<usize> = (0..n.pow(len as u32)).map(|c| (c / stride) % n).collect();
        Self::from_labels(&labels)
    }

    pub fn carrier_size(&self) -> usize {
        self.labels.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }

    pub fn label(&self, x: usize) -> usize {
        self.labels[x]
    }

    /// Common refinement `α ∨ β`.
    pub fn join(&self, other: &Partition) -> Result<Partition, EntropyError> {
        if self.carrier_size() != other.carrier_size() {
            return Err(EntropyError::PartitionMismatch);
        }
        let combined: Vec<usize> = self.labels.iter().zip(&other.labels).map(|(a, b)| a * other.blocks + b).collect();
        Ok(Self::from_labels(&combined))
    }

    fn masses(&self, weights: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.blocks];
        for (x, w) in weights.iter().enumerate() {
            out[self.labels[x]] += w;
        }
        out
    }
}

pub fn partition_entropy(weights: &[Rational], alpha: &Partition) -> Result<f64, EntropyError> {
    if alpha.carrier_size() != weights.len() {
        return Err(EntropyError::PartitionMismatch);
    }
    Ok(shannon(&alpha.masses(weights)))
}

/// `H(α|β) = Σ_B μ(B) H(α | B)` for a finite distribution `weights`.
pub fn partition_conditional_entropy(
    weights: &[Rational],
    alpha: &Partition,
    beta: &Partition,
) -> Result<f64, EntropyError> {
    if alpha.carrier_size() != weights.len() || beta.carrier_size() != weights.len() {
        return Err(EntropyError::PartitionMismatch);
    }
    let joint = alpha.join(beta)?;
    let cell_mass = joint.masses(weights);
    let beta_mass = beta.masses(weights);
    // which β-block each joint cell sits in
    let mut cell_beta = vec![0; joint.blocks];
    for x in 0..weights.len() {
        cell_beta[joint.labels[x]] = beta.labels[x];
    }
    Ok(compensated_sum(cell_mass.iter().enumerate().filter(|(_, m)| !m.is_zero()).map(|(c, m)| {
        let ratio = m / &beta_mass[cell_beta[c]];
        -to_f64(m) * to_f64(&ratio).ln()
    })))
}

pub fn dense_conditional_entropy(mu: &DenseMeasure, alpha: &Partition, beta: &Partition) -> Result<f64, EntropyError> {
    partition_conditional_entropy(mu.weights(), alpha, beta)
}

/// Plug-in estimate of `h_L` from length-`L` windows inside each word
/// (windows never straddle two words). The shorter conditional entropies
/// are read off the prefixes of the same windows, so deterministic
/// continuations give exactly zero.
pub fn empirical_block_entropy(
    words: &[Vec<usize>],
    alphabet_size: usize,
    len: usize,
    tol: f64,
) -> Result<EntropyEstimate, EntropyError> {
    if len == 0 {
        return Err(EntropyError::InvalidDepth);
    }
    let n = alphabet_size;
    let cells = symbolic::word_count(n, len)?;
    let total_symbols: usize = words.iter().map(Vec::len).sum();
    let need = 100usize.saturating_mul(cells);
    if total_symbols < need {
        return Err(EntropyError::InsufficientData { have: total_symbols, need });
    }
    let mut counts = vec![0u64; cells];
    let top = cells / n;
    for w in words {
        if w.len() < len {
            continue;
        }
        let mut code = symbolic::encode(&w[..len - 1], n);
        for &s in &w[len - 1..] {
            code = (code % top) * n + s;
            counts[code] += 1;
        }
    }
    let windows: u64 = counts.iter().sum();
    if windows == 0 {
        return Err(EntropyError::InsufficientData { have: total_symbols, need });
    }
    let mut levels = vec![counts];
    for _ in 0..len {
        let prev = levels.last().unwrap();
        let next: Vec<u64> = prev.chunks(n).map(|c| c.iter().sum()).collect();
        levels.push(next);
    }
    levels.reverse();
    let nf = windows as f64;
    let hs: Vec<f64> = (1..=len)
        .map(|l| {
            compensated_sum(levels[l].iter().enumerate().filter(|(_, &c)| c > 0).map(|(code, &c)| {
                let parent = levels[l - 1][code / n];
                -(c as f64 / nf) * (c as f64 / parent as f64).ln()
            }))
        })
        .collect();
    let nonzero = |l: usize| levels[l].iter().filter(|&&c| c > 0).count() as f64;
    let value = hs[len - 1];
    let corrected = value + (nonzero(len) - nonzero(len - 1)) / (2.0 * nf);
    let gap = if len >= 2 { (hs[len - 1] - hs[len - 2]).abs() } else { f64::INFINITY };
    Ok(EntropyEstimate {
        value,
        upper_bounds: hs,
        lower_bound: None,
        method: EstimateMethod::Empirical,
        l_max: len,
        converged: gap < tol,
        gap,
        note: Some(format!("plug-in estimate from {windows} windows; Miller-Madow corrected h_{len} = {corrected:.6}")),
    })
}
