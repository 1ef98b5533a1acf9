//! Ergodicity verdicts: exact where the measure's structure decides it,
//! Birkhoff time averages as statistical evidence otherwise, and the
//! convolution scenario for ergodic factors with certified disjointness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rational::{to_f64, Rational};
use crate::symbolic::{
    self, block_distribution, convolve_shift, cylinder_prob, decode, encode, hidden_chain, is_shift_invariant,
    MeasureKind, Sampler, ShiftMeasure, SymbolicError, Window,
};

/// Observations per seed below which a Birkhoff report is refused.
pub const MIN_STEPS: usize = 1000;
/// Across-seed standard deviation threshold for an ergodic-consistent verdict.
pub const DISPERSION_THRESHOLD: f64 = 5e-3;
/// Depth at which invariance of a convolution is checked exactly.
pub const INVARIANCE_DEPTH: usize = 6;
/// Largest depth used to tell mixture components apart.
const DISTINCTNESS_DEPTH_CAP: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErgodicityError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("need at least {min} steps per seed, got {steps}")]
    InsufficientSteps { steps: usize, min: usize },
    #[error("need at least one seed and one observable")]
    EmptyExperiment,
    #[error("{factor} factor is not ergodic ({verdict:?})")]
    FactorNotErgodic { factor: String, verdict: Verdict },
    #[error("certificate does not apply: {0}")]
    CertificateInvalid(String),
    #[error("convolution failed the exact invariance check")]
    ConvolutionNotInvariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Ergodic,
    NonErgodic,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictMethod {
    ExactBernoulli,
    ExactMarkov,
    ExactOrbit,
    ExactMixture,
    Birkhoff,
    /// No exact criterion applies.
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Closed communicating classes of a Markov chain's support.
    ClosedClasses(Vec<Vec<usize>>),
    /// Distinct components of a mixture, with their weights.
    ComponentSplit(Vec<(String, String)>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErgodicityVerdict {
    pub verdict: Verdict,
    pub method: VerdictMethod,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl ErgodicityVerdict {
    fn exact(verdict: Verdict, method: VerdictMethod) -> Self {
        ErgodicityVerdict { verdict, method, witness: None, note: None }
    }
}

/// Communicating classes of adjacency lists, each sorted, listed by
/// smallest member.
fn communicating_classes(graph: &[Vec<usize>], nodes: &[usize]) -> Vec<Vec<usize>> {
    let n = graph.len();
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                for &w in &graph[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen
        })
        .collect();
    let mut assigned = vec![false; n];
    let mut classes = Vec::new();
    for &i in nodes {
        if assigned[i] {
            continue;
        }
        let class: Vec<usize> = nodes.iter().copied().filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &class {
            assigned[j] = true;
        }
        classes.push(class);
    }
    classes
}

/// Word-length depth that separates two finite-state measures if they
/// differ at all: `n₁ + n₂` hidden states suffice.
fn distinctness_depth(a: &ShiftMeasure, b: &ShiftMeasure) -> Option<usize> {
    let states = hidden_chain(a)?.states() + hidden_chain(b)?.states();
    let n = a.alphabet().order().max(2);
    let mut depth = states.min(DISTINCTNESS_DEPTH_CAP);
    while depth > 1 && symbolic::word_count(n, depth).is_err() {
        depth -= 1;
    }
    (depth >= states).then_some(depth)
}

fn same_measure(a: &ShiftMeasure, b: &ShiftMeasure) -> Option<bool> {
    if a == b {
        return Some(true);
    }
    // a difference at any depth is conclusive even if the full depth is too large
    let cap = distinctness_depth(a, b);
    let probe = cap.unwrap_or(8);
    for len in 1..=probe {
        if block_distribution(a, len).ok()? != block_distribution(b, len).ok()? {
            return Some(false);
        }
    }
    cap.map(|_| true)
}

fn flatten(mu: &ShiftMeasure) -> Vec<(Rational, ShiftMeasure)> {
    match mu.kind() {
        MeasureKind::Mixture(cs) => {
            cs.iter().flat_map(|(w, m)| flatten(m).into_iter().map(move |(v, c)| (w * v, c))).collect()
        }
        _ => vec![(Rational::from_integer(1.into()), mu.clone())],
    }
}

pub fn is_ergodic_exact(mu: &ShiftMeasure) -> ErgodicityVerdict {
    match mu.kind() {
        MeasureKind::Bernoulli(_) => ErgodicityVerdict::exact(Verdict::Ergodic, VerdictMethod::ExactBernoulli),
        MeasureKind::PeriodicOrbit(_) => ErgodicityVerdict::exact(Verdict::Ergodic, VerdictMethod::ExactOrbit),
        MeasureKind::Markov(chain) => {
            if !chain.is_stationary() {
                return ErgodicityVerdict {
                    note: Some("initial distribution is not stationary, so the measure is not invariant".into()),
                    ..ErgodicityVerdict::exact(Verdict::Unknown, VerdictMethod::Undecided)
                };
            }
            let graph = chain.support_graph();
            let support: Vec<usize> =
                (0..graph.len()).filter(|&i| !num_traits::Zero::is_zero(&chain.initial()[i])).collect();
            let classes = communicating_classes(&graph, &support);
            if classes.len() == 1 {
                ErgodicityVerdict::exact(Verdict::Ergodic, VerdictMethod::ExactMarkov)
            } else {
                ErgodicityVerdict {
                    witness: Some(Witness::ClosedClasses(classes)),
                    ..ErgodicityVerdict::exact(Verdict::NonErgodic, VerdictMethod::ExactMarkov)
                }
            }
        }
        MeasureKind::Mixture(_) => {
            let parts = flatten(mu);
            // merge equal components
            let mut distinct: Vec<(Rational, ShiftMeasure)> = Vec::new();
            for (w, m) in parts {
                let mut merged = false;
                for (dw, dm) in distinct.iter_mut() {
                    match same_measure(dm, &m) {
                        Some(true) => {
                            *dw += &w;
                            merged = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            return ErgodicityVerdict {
                                note: Some("could not decide whether mixture components differ".into()),
                                ..ErgodicityVerdict::exact(Verdict::Unknown, VerdictMethod::Undecided)
                            }
                        }
                    }
                }
                if !merged {
                    distinct.push((w, m));
                }
            }
            if distinct.len() == 1 {
                let mut inner = is_ergodic_exact(&distinct[0].1);
                inner.note = Some("all mixture components coincide".into());
                return inner;
            }
            ErgodicityVerdict {
                witness: Some(Witness::ComponentSplit(
                    distinct.iter().map(|(w, m)| (w.to_string(), m.describe())).collect(),
                )),
                ..ErgodicityVerdict::exact(Verdict::NonErgodic, VerdictMethod::ExactMixture)
            }
        }
        MeasureKind::Convolution(..) => ErgodicityVerdict::exact(Verdict::Unknown, VerdictMethod::Undecided),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableSummary {
    pub window: String,
    pub start: i64,
    pub exact: f64,
    pub mean: f64,
    /// Across-seed standard deviation of the time averages.
    pub dispersion: f64,
    /// Allowed `|mean - exact|`.
    pub bound: f64,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BirkhoffReport {
    pub steps: usize,
    pub seeds: usize,
    pub observables: Vec<ObservableSummary>,
    pub max_dispersion: f64,
    pub threshold: f64,
    /// Heuristic: small dispersion and every mean within its bound.
    pub ergodic_consistent: bool,
}

/// All cylinders at the origin of length 1 and 2, plus three seeded random
/// distinct length-4 cylinders.
pub fn default_observables(alphabet: usize, seed: u64) -> Vec<Window> {
    let mut out = Vec::new();
    for len in 1..=2 {
        for code in 0..alphabet.pow(len as u32) {
            out.push(Window::at_origin(decode(code, alphabet, len)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = Vec::new();
    while drawn.len() < 3 {
        let w: Vec<usize> = (0..4).map(|_| rng.gen_range(0..alphabet)).collect();
        if !drawn.contains(&w) {
            drawn.push(w);
        }
    }
    out.extend(drawn.into_iter().map(Window::at_origin));
    out
}

/// Per-seed time averages `(1/N) Σ_{i<N} 1_{[w]}(T^i x)` for each
/// observable, then a comparison with the exact cylinder probabilities.
///
/// Seed `j` draws its orbit with seed `base_seed + j`. A grand mean
/// matches when it lies within `3·max(σ_binomial, dispersion)/√seeds` of
/// the exact value.
pub fn birkhoff_report(
    mu: &ShiftMeasure,
    observables: &[Window],
    steps: usize,
    seeds: usize,
    base_seed: u64,
) -> Result<BirkhoffReport, ErgodicityError> {
    if steps < MIN_STEPS {
        return Err(ErgodicityError::InsufficientSteps { steps, min: MIN_STEPS });
    }
    if seeds == 0 || observables.is_empty() {
        return Err(ErgodicityError::EmptyExperiment);
    }
    let exact: Vec<f64> =
        observables.iter().map(|w| cylinder_prob(mu, w).map(|p| to_f64(&p))).collect::<Result<_, _>>()?;
    let n = mu.alphabet().order();
    let min_start = observables.iter().map(|w| w.start).min().unwrap().min(0);
    let offsets: Vec<usize> = observables.iter().map(|w| (w.start - min_start) as usize).collect();
    let reach = observables.iter().zip(&offsets).map(|(w, o)| o + w.symbols.len()).max().unwrap();
    let codes: Vec<usize> = observables.iter().map(|w| encode(&w.symbols, n)).collect();
    let sampler = Sampler::new(mu);

    let averages: Vec<Vec<f64>> = (0..seeds as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(j));
            let mut x = vec![0; steps + reach];
            sampler.fill(&mut rng, &mut x);
            observables
                .iter()
                .zip(&offsets)
                .zip(&codes)
                .map(|((w, &off), &code)| {
                    let len = w.symbols.len();
                    let hits = (0..steps).filter(|&i| encode(&x[i + off..i + off + len], n) == code).count();
                    hits as f64 / steps as f64
                })
                .collect()
        })
        .collect();

    let sf = seeds as f64;
    let summaries: Vec<ObservableSummary> = observables
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let vals: Vec<f64> = averages.iter().map(|a| a[k]).collect();
            let mean = vals.iter().sum::<f64>() / sf;
            let var = if seeds > 1 { vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (sf - 1.0) } else { 0.0 };
            let dispersion = var.sqrt();
            let p = exact[k];
            let binomial = (p * (1.0 - p) / steps as f64).sqrt();
            let bound = 3.0 * binomial.max(dispersion) / sf.sqrt();
            ObservableSummary {
                window: symbolic::format_word(&w.symbols, n),
                start: w.start,
                exact: p,
                mean,
                dispersion,
                bound,
                matches: (mean - p).abs() <= bound,
            }
        })
        .collect();
    let max_dispersion = summaries.iter().map(|s| s.dispersion).fold(0.0, f64::max);
    let ergodic_consistent = max_dispersion < DISPERSION_THRESHOLD && summaries.iter().all(|s| s.matches);
    Ok(BirkhoffReport {
        steps,
        seeds,
        observables: summaries,
        max_dispersion,
        threshold: DISPERSION_THRESHOLD,
        ergodic_consistent,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// One factor sits on a single fixed point.
    PointMass,
    /// One factor is a periodic orbit, the other fully supported Bernoulli.
    PeriodicVsMixing,
    /// Asserted by the caller; reported as unverified.
    Declared,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct DisjointnessCertificate {
    pub kind: CertificateKind,
    pub justification: String,
}

fn is_point_mass(m: &ShiftMeasure) -> bool {
    m.is_stationary_by_construction()
        && block_distribution(m, 1)
            .map(|d| d.iter().filter(|p| !num_traits::Zero::is_zero(*p)).count() == 1)
            .unwrap_or(false)
}

fn is_full_bernoulli(m: &ShiftMeasure) -> bool {
    matches!(m.kind(), MeasureKind::Bernoulli(p) if p.weights().iter().all(|w| !num_traits::Zero::is_zero(w)))
}

impl DisjointnessCertificate {
    pub fn new(kind: CertificateKind, justification: impl Into<String>) -> Self {
        DisjointnessCertificate { kind, justification: justification.into() }
    }

    /// Structural check of the certificate against the two factors.
    pub fn validate(&self, mu: &ShiftMeasure, nu: &ShiftMeasure) -> Result<(), ErgodicityError> {
        match self.kind {
            CertificateKind::PointMass => {
                if is_point_mass(mu) || is_point_mass(nu) {
                    Ok(())
                } else {
                    Err(ErgodicityError::CertificateInvalid("neither factor is a point mass".into()))
                }
            }
            CertificateKind::PeriodicVsMixing => {
                let periodic = |m: &ShiftMeasure| matches!(m.kind(), MeasureKind::PeriodicOrbit(_));
                if (periodic(mu) && is_full_bernoulli(nu)) || (periodic(nu) && is_full_bernoulli(mu)) {
                    Ok(())
                } else {
                    Err(ErgodicityError::CertificateInvalid(
                        "needs one periodic orbit and one fully supported Bernoulli factor".into(),
                    ))
                }
            }
            CertificateKind::Declared => Ok(()),
        }
    }

    pub fn verified(&self) -> bool {
        self.kind != CertificateKind::Declared
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioParams {
    pub steps: usize,
    pub seeds: usize,
    pub base_seed: u64,
    /// Defaults to [`default_observables`] seeded with `base_seed`.
    pub observables: Option<Vec<Window>>,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams { steps: 1_000_000, seeds: 100, base_seed: 0, observables: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvolutionScenarioReport {
    pub left: ErgodicityVerdict,
    pub right: ErgodicityVerdict,
    pub certificate: DisjointnessCertificate,
    pub certificate_verified: bool,
    pub invariant: bool,
    pub birkhoff: BirkhoffReport,
    pub verdict: Verdict,
}

/// Ergodic factors plus a disjointness certificate should give an ergodic
/// convolution. Hypotheses are checked first, then exact invariance, then
/// Birkhoff sampling against exact cylinder probabilities.
pub fn convolution_ergodicity_scenario(
    mu: &ShiftMeasure,
    nu: &ShiftMeasure,
    cert: &DisjointnessCertificate,
    params: &ScenarioParams,
) -> Result<ConvolutionScenarioReport, ErgodicityError> {
    let left = is_ergodic_exact(mu);
    let right = is_ergodic_exact(nu);
    for (name, v) in [("left", &left), ("right", &right)] {
        if v.verdict != Verdict::Ergodic {
            return Err(ErgodicityError::FactorNotErgodic { factor: name.into(), verdict: v.verdict });
        }
    }
    cert.validate(mu, nu)?;
    let conv = convolve_shift(mu, nu)?;
    if !is_shift_invariant(&conv, INVARIANCE_DEPTH)? {
        return Err(ErgodicityError::ConvolutionNotInvariant);
    }
    let observables =
        params.observables.clone().unwrap_or_else(|| default_observables(mu.alphabet().order(), params.base_seed));
    let birkhoff = birkhoff_report(&conv, &observables, params.steps, params.seeds, params.base_seed)?;
    let verdict = if birkhoff.ergodic_consistent { Verdict::Ergodic } else { Verdict::Unknown };
    Ok(ConvolutionScenarioReport {
        left,
        right,
        certificate: cert.clone(),
        certificate_verified: cert.verified(),
        invariant: true,
        birkhoff,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_group::FiniteGroup;
    use crate::rational::r;
    use crate::symbolic::ShiftSystem;

    fn sys() -> ShiftSystem {
        ShiftSystem::one_sided(&FiniteGroup::cyclic(2).unwrap())
    }

    fn bern(p1: Rational) -> ShiftMeasure {
        let p0 = Rational::from_integer(1.into()) - &p1;
        ShiftMeasure::bernoulli_weights(&sys(), vec![p0, p1]).unwrap()
    }

    #[test]
    fn exact_verdicts() {
        assert_eq!(is_ergodic_exact(&bern(r(1, 4))).verdict, Verdict::Ergodic);
        let id = ShiftMeasure::markov(
            &sys(),
            vec![vec![r(1, 1), r(0, 1)], vec![r(0, 1), r(1, 1)]],
            Some(vec![r(1, 2), r(1, 2)]),
        )
        .unwrap();
        let v = is_ergodic_exact(&id);
        assert_eq!(v.verdict, Verdict::NonErgodic);
        assert_eq!(v.witness, Some(Witness::ClosedClasses(vec![vec![0], vec![1]])));
        let mix = ShiftMeasure::mixture(vec![(r(1, 2), bern(r(1, 4))), (r(1, 2), bern(r(3, 4)))]).unwrap();
        assert_eq!(is_ergodic_exact(&mix).verdict, Verdict::NonErgodic);
        let per = ShiftMeasure::periodic(&sys(), vec![0, 1]).unwrap();
        assert_eq!(is_ergodic_exact(&per).verdict, Verdict::Ergodic);
        let conv = ShiftMeasure::lazy_convolution(&bern(r(1, 4)), &per).unwrap();
        assert_eq!(is_ergodic_exact(&conv).verdict, Verdict::Unknown);
    }

    #[test]
    fn mixtures_of_equal_measures_stay_ergodic() {
        let mix = ShiftMeasure::mixture(vec![(r(1, 3), bern(r(1, 2))), (r(2, 3), ShiftMeasure::haar(&sys()))]).unwrap();
        let v = is_ergodic_exact(&mix);
        assert_eq!(v.verdict, Verdict::Ergodic);
        assert_eq!(v.method, VerdictMethod::ExactBernoulli);
    }

    #[test]
    fn birkhoff_fair_coin() {
        let rep = birkhoff_report(&bern(r(1, 2)), &[Window::at_origin(vec![0])], 100_000, 20, 7).unwrap();
        assert!(rep.ergodic_consistent, "{rep:?}");
        assert!((rep.observables[0].mean - 0.5).abs() < 0.002);
    }

    #[test]
    fn birkhoff_detects_split_support() {
        let split = ShiftMeasure::mixture(vec![
            (r(1, 2), ShiftMeasure::constant(&sys(), 0).unwrap()),
            (r(1, 2), ShiftMeasure::constant(&sys(), 1).unwrap()),
        ])
        .unwrap();
        let rep = birkhoff_report(&split, &[Window::at_origin(vec![0])], 1000, 20, 0).unwrap();
        assert!(!rep.ergodic_consistent);
        assert!(rep.max_dispersion > 0.4);
    }

    #[test]
    fn birkhoff_input_checks() {
        assert_eq!(
            birkhoff_report(&bern(r(1, 2)), &[Window::at_origin(vec![0])], 10, 2, 0),
            Err(ErgodicityError::InsufficientSteps { steps: 10, min: MIN_STEPS })
        );
        assert_eq!(birkhoff_report(&bern(r(1, 2)), &[], 1000, 2, 0), Err(ErgodicityError::EmptyExperiment));
    }

    #[test]
    fn certificates() {
        let b = bern(r(1, 4));
        let per = ShiftMeasure::periodic(&sys(), vec![0, 1]).unwrap();
        let zero = ShiftMeasure::constant(&sys(), 0).unwrap();
        assert!(DisjointnessCertificate::new(CertificateKind::PointMass, "").validate(&b, &zero).is_ok());
        assert!(DisjointnessCertificate::new(CertificateKind::PointMass, "").validate(&b, &per).is_err());
        assert!(DisjointnessCertificate::new(CertificateKind::PeriodicVsMixing, "").validate(&per, &b).is_ok());
        assert!(DisjointnessCertificate::new(CertificateKind::PeriodicVsMixing, "").validate(&zero, &per).is_err());
        let declared = DisjointnessCertificate::new(CertificateKind::Declared, "trust me");
        assert!(declared.validate(&per, &per).is_ok());
        assert!(!declared.verified());
    }

    #[test]
    fn scenario_examples() {
        let params = ScenarioParams { steps: 20_000, seeds: 10, base_seed: 3, observables: None };
        let b = bern(r(1, 4));
        let zero = ShiftMeasure::constant(&sys(), 0).unwrap();
        let rep = convolution_ergodicity_scenario(
            &b,
            &zero,
            &DisjointnessCertificate::new(CertificateKind::PointMass, ""),
            &params,
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Ergodic);

        let per = ShiftMeasure::periodic(&sys(), vec![0, 1]).unwrap();
        let cert = DisjointnessCertificate::new(CertificateKind::PeriodicVsMixing, "");
        let rep = convolution_ergodicity_scenario(&b, &per, &cert, &params).unwrap();
        assert!(rep.invariant);
        assert_eq!(rep.verdict, Verdict::Ergodic, "{:?}", rep.birkhoff);

        let mix = ShiftMeasure::mixture(vec![(r(1, 2), bern(r(1, 4))), (r(1, 2), bern(r(3, 4)))]).unwrap();
        assert!(matches!(
            convolution_ergodicity_scenario(&b, &mix, &cert, &params),
            Err(ErgodicityError::FactorNotErgodic { .. })
        ));
        assert!(matches!(
            convolution_ergodicity_scenario(&b, &b, &cert, &params),
            Err(ErgodicityError::CertificateInvalid(_))
        ));
    }
}
