//! The circle endomorphism `x ↦ kx mod 1` with its k-adic generating
//! partition, Lebesgue measure and atomic measures on rational periodic
//! orbits.
//!
//! Random points are 64-bit fixed-point numbers `u / 2^64`, so digit
//! extraction is exact integer arithmetic. Such a point carries 64 random
//! bits; itineraries stay faithful to a Lebesgue-typical point for
//! `⌊40 / log2 k⌋` steps, and longer samples are built from fresh points.

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::entropy::{self, EntropyError, EntropyEstimate};
use crate::finite_group::FiniteGroup;
use crate::rational::Rational;
use crate::symbolic::{ShiftMeasure, ShiftSystem, SymbolicError, STATE_LIMIT};

/// Bits of a random point trusted per block.
pub const PRECISION_BITS: f64 = 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error("k must be at least 2, got {0}")]
    BadK(u64),
    #[error("depth limit exceeded: {k}^{depth} intervals exceeds {limit}")]
    DepthLimitExceeded { k: u64, depth: u32, limit: usize },
    #[error("periodic orbit needs 0 <= p < q with gcd(q, k) = 1, got {p}/{q}")]
    BadOrbit { p: u64, q: u64 },
    #[error("block length {len} exceeds the precision budget of {budget} steps")]
    BeyondPrecision { len: usize, budget: usize },
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CircleSystem {
    k: u64,
}

pub fn times_k(k: u64) -> Result<CircleSystem, TorusError> {
    if k < 2 || k > u32::MAX as u64 {
        return Err(TorusError::BadK(k));
    }
    Ok(CircleSystem { k })
}

/// Half-open interval `[lo/den, hi/den)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Interval {
    pub lo: u64,
    pub hi: u64,
    pub den: u64,
}

impl CircleSystem {
    pub fn k(&self) -> u64 {
        self.k
    }

    /// `[i/k, (i+1)/k)` for `i < k`.
    pub fn generating_partition(&self) -> Vec<Interval> {
        (0..self.k).map(|i| Interval { lo: i, hi: i + 1, den: self.k }).collect()
    }

    /// Preimage of `[lo/den, hi/den) ⊂ [0,1)`: `k` intervals over the
    /// denominator `k·den`, in increasing order.
    pub fn preimage(&self, iv: Interval) -> Vec<Interval> {
        (0..self.k).map(|m| Interval { lo: iv.lo + m * iv.den, hi: iv.hi + m * iv.den, den: iv.den * self.k }).collect()
    }

    /// Trusted itinerary length of one random point.
    pub fn precision_budget(&self) -> usize {
        (PRECISION_BITS / (self.k as f64).log2()).floor().max(1.0) as usize
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        frac(&(x * Rational::from_integer(self.k.into())))
    }
}

fn frac(x: &Rational) -> Rational {
    x - x.floor()
}

/// Checks `Leb(T⁻¹I) = Leb(I)` exactly for every depth-`d` partition
/// interval, and that the `k` preimage pieces are disjoint.
pub fn haar_invariance_check(sys: &CircleSystem, depth: u32) -> Result<bool, TorusError> {
    let limit_err = TorusError::DepthLimitExceeded { k: sys.k, depth, limit: STATE_LIMIT };
    let count = sys.k.checked_pow(depth).ok_or(limit_err.clone())?;
    if count > STATE_LIMIT as u64 {
        return Err(limit_err);
    }
    for j in 0..count {
        let iv = Interval { lo: j, hi: j + 1, den: count };
        let pieces = sys.preimage(iv);
        let disjoint = pieces.windows(2).all(|w| w[0].hi <= w[1].lo);
        // all pieces share the denominator k·den, so lengths add as integers
        let measure: u64 = pieces.iter().map(|p| p.hi - p.lo).sum();
        if !disjoint || measure * iv.den != (iv.hi - iv.lo) * pieces[0].den {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq)]
pub enum StartPoint {
    /// Reduced mod 1 and iterated exactly.
    Rational(Rational),
    /// A seeded 64-bit fixed-point point.
    Random { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coding {
    pub word: Vec<usize>,
    pub warning: Option<String>,
}

fn fixed_point_itinerary(k: u64, mut u: u64, out: &mut [usize]) {
    for d in out.iter_mut() {
        let v = u as u128 * k as u128;
        *d = (v >> 64) as usize;
        u = v as u64;
    }
}

/// Itinerary of `x0` through the generating partition for `n` steps.
pub fn symbolic_coding(sys: &CircleSystem, x0: &StartPoint, n: usize) -> Coding {
    match x0 {
        StartPoint::Rational(x) => {
            let k = Rational::from_integer(sys.k.into());
            let mut x = frac(x);
            let word = (0..n)
                .map(|_| {
                    let y = &x * &k;
                    let digit = y.floor();
                    x = y - &digit;
                    digit.to_integer().to_usize().expect("digit below k")
                })
                .collect();
            Coding { word, warning: None }
        }
        StartPoint::Random { seed } => {
            let mut word = vec![0; n];
            fixed_point_itinerary(sys.k, ChaCha8Rng::seed_from_u64(*seed).gen(), &mut word);
            let budget = sys.precision_budget();
            let warning = (n > budget)
                .then(|| format!("symbols beyond step {budget} are not faithful to a Lebesgue-typical point"));
            Coding { word, warning }
        }
    }
}

/// `n` Lebesgue-distributed symbols as consecutive itineraries of fresh
/// random points, each `block` long (the last may be shorter).
pub fn lebesgue_blocks(sys: &CircleSystem, n: usize, block: usize, seed: u64) -> Result<Vec<Vec<usize>>, TorusError> {
    let budget = sys.precision_budget();
    if block == 0 || block > budget {
        return Err(TorusError::BeyondPrecision { len: block, budget });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n.div_ceil(block));
    let mut left = n;
    while left > 0 {
        let len = left.min(block);
        let mut w = vec![0; len];
        fixed_point_itinerary(sys.k, rng.gen(), &mut w);
        out.push(w);
        left -= len;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CircleMeasure {
    Lebesgue,
    /// Equal atoms on the ×k orbit of `p/q`.
    PeriodicAtomic {
        p: u64,
        q: u64,
    },
}

impl CircleMeasure {
    pub fn periodic(sys: &CircleSystem, p: u64, q: u64) -> Result<Self, TorusError> {
        if q == 0 || p >= q || q.gcd(&sys.k) != 1 {
            return Err(TorusError::BadOrbit { p, q });
        }
        Ok(CircleMeasure::PeriodicAtomic { p, q })
    }
}

/// The orbit of `p/q`, in order, ending just before it returns.
pub fn periodic_orbit(sys: &CircleSystem, p: u64, q: u64) -> Result<Vec<Rational>, TorusError> {
    CircleMeasure::periodic(sys, p, q)?;
    let start = Rational::new(p.into(), q.into());
    let mut orbit = vec![start.clone()];
    let mut x = sys.apply(&start);
    while x != start {
        orbit.push(x.clone());
        x = sys.apply(&x);
    }
    Ok(orbit)
}

/// Entropy of `×k` under `μ` through the generating partition.
///
/// Lebesgue: plug-in estimate from `n` sampled symbols in fresh-point
/// blocks. Periodic atoms: the exact entropy of the (periodic) itinerary
/// measure.
pub fn circle_entropy_report(
    sys: &CircleSystem,
    mu: &CircleMeasure,
    len: usize,
    n: usize,
    seed: u64,
) -> Result<EntropyEstimate, TorusError> {
    match mu {
        CircleMeasure::Lebesgue => {
            let words = lebesgue_blocks(sys, n, sys.precision_budget(), seed)?;
            if len > sys.precision_budget() {
                return Err(TorusError::BeyondPrecision { len, budget: sys.precision_budget() });
            }
            Ok(entropy::empirical_block_entropy(&words, sys.k as usize, len, 1e-2)?)
        }
        CircleMeasure::PeriodicAtomic { p, q } => {
            let period = periodic_orbit(sys, *p, *q)?.len();
            let start = StartPoint::Rational(Rational::new((*p).into(), (*q).into()));
            let word = symbolic_coding(sys, &start, period).word;
            let alphabet = FiniteGroup::cyclic(sys.k as usize).map_err(SymbolicError::from)?;
            let measure = ShiftMeasure::periodic(&ShiftSystem::one_sided(&alphabet), word)?;
            Ok(entropy::entropy_rate(&measure, len, 1e-12)?)
        }
    }
}

/// Counts of each length-`len` word among windows of Lebesgue blocks.
pub fn coded_block_counts(sys: &CircleSystem, len: usize, n: usize, seed: u64) -> Result<Vec<u64>, TorusError> {
    let words = lebesgue_blocks(sys, n, sys.precision_budget(), seed)?;
    let k = sys.k as usize;
    let mut counts = vec![0u64; crate::symbolic::word_count(k, len)?];
    for w in &words {
        for win in w.windows(len) {
            counts[crate::symbolic::encode(win, k)] += 1;
        }
    }
    Ok(counts)
}

impl Interval {
    pub fn length(&self) -> Rational {
        Rational::new((self.hi - self.lo).into(), self.den.into())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let lo = Rational::new(self.lo.into(), self.den.into());
        let hi = Rational::new(self.hi.into(), self.den.into());
        *x >= lo && *x < hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::r;

    #[test]
    fn construction() {
        assert_eq!(times_k(2).unwrap().k(), 2);
        assert_eq!(times_k(3).unwrap().generating_partition().len(), 3);
        assert_eq!(times_k(1), Err(TorusError::BadK(1)));
    }

    #[test]
    fn partition_refines() {
        let sys = times_k(3).unwrap();
        for iv in sys.generating_partition() {
            let pre = sys.preimage(iv);
            assert_eq!(pre.len(), 3);
            for p in &pre {
                assert_eq!(p.length(), r(1, 9));
                // each piece maps into the interval it came from
                let mid = Rational::new((2 * p.lo + 1).into(), (2 * p.den).into());
                assert!(iv.contains(&sys.apply(&mid)));
            }
        }
    }

    #[test]
    fn haar_invariance() {
        assert!(haar_invariance_check(&times_k(2).unwrap(), 10).unwrap());
        assert!(haar_invariance_check(&times_k(3).unwrap(), 6).unwrap());
        assert!(haar_invariance_check(&times_k(2).unwrap(), 1).unwrap());
        assert!(matches!(haar_invariance_check(&times_k(2).unwrap(), 25), Err(TorusError::DepthLimitExceeded { .. })));
    }

    #[test]
    fn rational_codings() {
        let sys = times_k(2).unwrap();
        assert_eq!(symbolic_coding(&sys, &StartPoint::Rational(r(0, 1)), 5).word, vec![0; 5]);
        assert_eq!(symbolic_coding(&sys, &StartPoint::Rational(r(1, 3)), 6).word, vec![0, 1, 0, 1, 0, 1]);
        // 1/7 = 0.001001..._2 and 4/3 reduces to 1/3
        assert_eq!(symbolic_coding(&sys, &StartPoint::Rational(r(1, 7)), 6).word, vec![0, 0, 1, 0, 0, 1]);
        assert_eq!(symbolic_coding(&sys, &StartPoint::Rational(r(4, 3)), 2).word, vec![0, 1]);
        let tri = times_k(3).unwrap();
        assert_eq!(symbolic_coding(&tri, &StartPoint::Rational(r(1, 4)), 4).word, vec![0, 2, 0, 2]);
    }

    #[test]
    fn random_codings() {
        let sys = times_k(2).unwrap();
        let short = symbolic_coding(&sys, &StartPoint::Random { seed: 1 }, 40);
        assert!(short.warning.is_none());
        assert!(symbolic_coding(&sys, &StartPoint::Random { seed: 1 }, 41).warning.is_some());
        let blocks = lebesgue_blocks(&sys, 1_000_000, 40, 5).unwrap();
        let ones: usize = blocks.iter().flatten().sum();
        assert!((ones as f64 / 1e6 - 0.5).abs() < 0.002);
        assert_eq!(sys.precision_budget(), 40);
        assert_eq!(times_k(3).unwrap().precision_budget(), 25);
    }

    #[test]
    fn periodic_measures() {
        let sys = times_k(2).unwrap();
        assert_eq!(CircleMeasure::periodic(&sys, 1, 4), Err(TorusError::BadOrbit { p: 1, q: 4 }));
        let mu = CircleMeasure::periodic(&sys, 1, 3).unwrap();
        assert_eq!(periodic_orbit(&sys, 1, 3).unwrap(), vec![r(1, 3), r(2, 3)]);
        assert!(periodic_orbit(&sys, 1, 4).is_err());
        let est = circle_entropy_report(&sys, &mu, 6, 0, 0).unwrap();
        assert_eq!(est.value, 0.0);
    }
}
