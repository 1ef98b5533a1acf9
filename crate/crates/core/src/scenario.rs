//! Scenario configs (JSON), their validation, execution, and deterministic
//! CSV/JSON reports.
//!
//! A config is `{"scenarios": [ ... ]}` where each scenario has `id`,
//! `kind`, `parameters`, and optional `seed` and `tolerances`.
//! Probabilities are rational strings such as `"3/4"`; tolerances are
//! decimal floats.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::entropy::{self, block_entropy_rate, entropy_rate, EntropyEstimate};
use crate::ergodicity::{self, DisjointnessCertificate, ErgodicityError, ScenarioParams, Verdict};
use crate::finite_group::{
    haar, independence_check, make_group, make_hom, DenseMeasure, FiniteGroup, GroupHom, GroupSpec,
};
use crate::rational::{parse_rational, Rational};
use crate::skew::{self, SkewSystem};
use crate::symbolic::{self, convolve_shift, ShiftMeasure, ShiftSystem};
use crate::torus::{self, CircleMeasure};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{path}: field `{field}`: {message}")]
    Schema { path: String, field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

/// One row of a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub quantity: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Row {
    fn info(quantity: impl Into<String>, value: f64) -> Self {
        Row { quantity: quantity.into(), value, lower: None, upper: None, tolerance: None, pass: true }
    }

    /// `|value - target| <= tol`.
    fn close(quantity: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Row {
            quantity: quantity.into(),
            value,
            lower: Some(target - tol),
            upper: Some(target + tol),
            tolerance: Some(tol),
            pass: (value - target).abs() <= tol,
        }
    }

    /// `lower - tol <= value <= upper + tol`, either side optional.
    fn within(quantity: impl Into<String>, value: f64, lower: Option<f64>, upper: Option<f64>, tol: f64) -> Self {
        let pass = lower.is_none_or(|l| value >= l - tol) && upper.is_none_or(|u| value <= u + tol);
        Row { quantity: quantity.into(), value, lower, upper, tolerance: Some(tol), pass }
    }

    fn flag(quantity: impl Into<String>, yes: bool, pass: bool) -> Self {
        Row { pass, ..Row::info(quantity, if yes { 1.0 } else { 0.0 }) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plot {
    pub name: String,
    pub x: String,
    pub y: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub kind: Kind,
    /// The statement the scenario checks.
    pub statement: &'static str,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub pass: bool,
    #[serde(skip)]
    pub plots: Vec<Plot>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub scenarios: Vec<ScenarioReport>,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    ConvolutionEntropy,
    HaarMaximality,
    EntropyAddition,
    Independence,
    NaturalExtension,
    ConvolutionErgodicity,
    Circle,
    ProductEntropy,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::ConvolutionEntropy,
        Kind::HaarMaximality,
        Kind::EntropyAddition,
        Kind::Independence,
        Kind::NaturalExtension,
        Kind::ConvolutionErgodicity,
        Kind::Circle,
        Kind::ProductEntropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::ConvolutionEntropy => "convolution_entropy",
            Kind::HaarMaximality => "haar_maximality",
            Kind::EntropyAddition => "entropy_addition",
            Kind::Independence => "independence",
            Kind::NaturalExtension => "natural_extension",
            Kind::ConvolutionErgodicity => "convolution_ergodicity",
            Kind::Circle => "circle",
            Kind::ProductEntropy => "product_entropy",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Kind::ConvolutionEntropy => {
                "max(h(mu), h(nu)) <= h(mu*nu) <= h(mu) + h(nu); equality with h(nu) when h(mu) = 0"
            }
            Kind::HaarMaximality => "h(mu) <= h(Haar) for every invariant mu of a surjective endomorphism",
            Kind::EntropyAddition => "h(skew, Haar extension) = h(base) + h(fiber automorphism, Haar)",
            Kind::Independence => "first coordinate and product are independent under m x mu iff mu = Haar",
            Kind::NaturalExtension => "the natural extension has the same finite marginals and the same entropy",
            Kind::ConvolutionErgodicity => "ergodic disjoint factors have an ergodic convolution",
            Kind::Circle => "h(mu) <= h(Lebesgue) = ln k for x -> kx mod 1",
            Kind::ProductEntropy => "h(mu x nu) = h(mu) + h(nu)",
        }
    }

    /// Parameter schema and tolerance keys, for `ergolab list`.
    pub fn schema(self) -> &'static str {
        match self {
            Kind::ConvolutionEntropy => {
                "alphabet?: group, sidedness?: one_sided|two_sided, mu: measure, nu: measure, l_max?: int = 10, \
                 expected?: float\n    tolerances: entropy = 1e-9, inequality = 1e-9"
            }
            Kind::HaarMaximality => {
                "alphabet?: group, sidedness?, measures: [measure], l_max?: int = 10, min_gap?: float = 0\n    \
                 tolerances: entropy = 1e-9"
            }
            Kind::EntropyAddition => {
                "alphabet?: group, base: measure, fiber: group, sigma?: [int] (automorphism table, default identity), \
                 window?: int = 1, phi: [int] (fiber value per window code), l_max?: int = 4\n    \
                 tolerances: addition = 1e-9"
            }
            Kind::Independence => "group: group, weights?: [rational] (default Haar)\n    tolerances: none",
            Kind::NaturalExtension => {
                "alphabet?: group, measure: measure, depth?: int = 8\n    tolerances: entropy = 1e-12"
            }
            Kind::ConvolutionErgodicity => {
                "alphabet?: group, mu: measure, nu: measure, certificate: {kind: point_mass|periodic_vs_mixing|declared, \
                 justification: string}, steps?: int = 1000000, seeds?: int = 100, \
                 expect?: ergodic|factor_not_ergodic|certificate_invalid = ergodic\n    tolerances: none"
            }
            Kind::Circle => {
                "k: int, measure: \"lebesgue\" | {periodic: rational}, l?: int = 12, symbols?: int = 10000000, \
                 invariance_depth?: int = 10, expected?: float (default ln k or 0)\n    \
                 tolerances: entropy = 0.02 (Lebesgue) or 1e-12 (periodic)"
            }
            Kind::ProductEntropy => {
                "alphabet?: group, right_alphabet?: group, mu: measure, nu: measure, l_max?: int = 6\n    \
                 tolerances: addition = 1e-9"
            }
        }
    }
}

pub fn list_text() -> String {
    let mut out = String::from(
        "scenario kinds (parameters; `?` marks optional fields)\n\n\
         measure: {type: bernoulli, weights: [rational]} | {type: haar} | \
         {type: markov, transition: [[rational]], initial?: [rational]} | {type: periodic, word: [int]} | \
         {type: constant, symbol: int} | {type: mixture, components: [{weight: rational, measure: measure}]} | \
         {type: convolution, left: measure, right: measure}\n\
         group: {cyclic: n} | {symmetric: n} | {dihedral: n} | {direct_product: [group, group]} | {explicit: [[int]]}\n\n",
    );
    for k in Kind::ALL {
        out.push_str(&format!("{}\n  checks: {}\n  parameters: {}\n\n", k.name(), k.statement(), k.schema()));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prob(pub Rational);

impl<'de> Deserialize<'de> for Prob {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => parse_rational(&s).map(Prob).map_err(serde::de::Error::custom),
            other => Err(serde::de::Error::custom(format!(
                "probabilities must be rational strings such as \"3/4\", got {other}"
            ))),
        }
    }
}

fn rationals(v: &[Prob]) -> Vec<Rational> {
    v.iter().map(|p| p.0.clone()).collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Bernoulli {
        weights: Vec<Prob>,
    },
    Haar,
    Markov {
        transition: Vec<Vec<Prob>>,
        #[serde(default)]
        initial: Option<Vec<Prob>>,
    },
    Periodic {
        word: Vec<usize>,
    },
    Constant {
        symbol: usize,
    },
    Mixture {
        components: Vec<Component>,
    },
    Convolution {
        left: Box<MeasureSpec>,
        right: Box<MeasureSpec>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    weight: Prob,
    measure: MeasureSpec,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideSpec {
    #[default]
    OneSided,
    TwoSided,
}

fn system_for(alphabet: &Option<GroupSpec>, side: SideSpec) -> Result<ShiftSystem, String> {
    let g = match alphabet {
        Some(spec) => make_group(spec).map_err(|e| e.to_string())?,
        None => FiniteGroup::cyclic(2).expect("cyclic"),
    };
    Ok(match side {
        SideSpec::OneSided => ShiftSystem::one_sided(&g),
        SideSpec::TwoSided => ShiftSystem::two_sided(&g),
    })
}

pub fn build_measure(spec: &MeasureSpec, sys: &ShiftSystem) -> Result<ShiftMeasure, String> {
    let e = |x: symbolic::SymbolicError| x.to_string();
    Ok(match spec {
        MeasureSpec::Bernoulli { weights } => ShiftMeasure::bernoulli_weights(sys, rationals(weights)).map_err(e)?,
        MeasureSpec::Haar => ShiftMeasure::haar(sys),
        MeasureSpec::Markov { transition, initial } => ShiftMeasure::markov(
            sys,
            transition.iter().map(|r| rationals(r)).collect(),
            initial.as_ref().map(|i| rationals(i)),
        )
        .map_err(e)?,
        MeasureSpec::Periodic { word } => ShiftMeasure::periodic(sys, word.clone()).map_err(e)?,
        MeasureSpec::Constant { symbol } => ShiftMeasure::constant(sys, *symbol).map_err(e)?,
        MeasureSpec::Mixture { components } => ShiftMeasure::mixture(
            components
                .iter()
                .map(|c| build_measure(&c.measure, sys).map(|m| (c.weight.0.clone(), m)))
                .collect::<Result<_, _>>()?,
        )
        .map_err(e)?,
        MeasureSpec::Convolution { left, right } => {
            convolve_shift(&build_measure(left, sys)?, &build_measure(right, sys)?).map_err(e)?
        }
    })
}

fn default_l10() -> usize {
    10
}
fn default_l4() -> usize {
    4
}
fn default_l6() -> usize {
    6
}
fn default_l8() -> usize {
    8
}
fn default_l12() -> usize {
    12
}
fn default_one() -> usize {
    1
}
fn default_steps() -> usize {
    1_000_000
}
fn default_seeds() -> usize {
    100
}
fn default_symbols() -> usize {
    10_000_000
}
fn default_depth10() -> u32 {
    10
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvolutionEntropyParams {
    #[serde(default)]
    alphabet: Option<GroupSpec>,
    #[serde(default)]
    sidedness: SideSpec,
    mu: MeasureSpec,
    nu: MeasureSpec,
    #[serde(default = "default_l10")]
    l_max: usize,
    #[serde(default)]
    expected: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HaarMaximalityParams {
    #[serde(default)]
    alphabet: Option<GroupSpec>,
    #[serde(default)]
    sidedness: SideSpec,
    measures: Vec<MeasureSpec>,
    #[serde(default = "default_l10")]
    l_max: usize,
    #[serde(default)]
    min_gap: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntropyAdditionParams {
    #[serde(default)]
    alphabet: Option<GroupSpec>,
    base: MeasureSpec,
    fiber: GroupSpec,
    #[serde(default)]
    sigma: Option<Vec<usize>>,
    #[serde(default = "default_one")]
    window: usize,
    phi: Vec<usize>,
    #[serde(default = "default_l4")]
    l_max: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndependenceParams {
    group: GroupSpec,
    #[serde(default)]
    weights: Option<Vec<Prob>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NaturalExtensionParams {
    #[serde(default)]
    alphabet: Option<GroupSpec>,
    measure: MeasureSpec,
    #[serde(default = "default_l8")]
    depth: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Expectation {
    #[default]
    Ergodic,
    FactorNotErgodic,
    CertificateInvalid,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvolutionErgodicityParams {
    #[serde(default)]
    alphabet: Option<GroupSpec>,
    mu: MeasureSpec,
    nu: MeasureSpec,
    certificate: DisjointnessCertificate,
    #[serde(default = "default_steps")]
    steps: usize,
    #[serde(default = "default_seeds")]
    seeds: usize,
    #[serde(default)]
    expect: Expectation,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CircleMeasureSpec {
    Lebesgue,
    Periodic(Prob),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircleParams {
    k: u64,
    measure: CircleMeasureSpec,
    #[serde(default = "default_l12")]
    l: usize,
    #[serde(default = "default_symbols")]
    symbols: usize,
    #[serde(default = "default_depth10")]
    invariance_depth: u32,
    #[serde(default)]
    expected: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductEntropyParams {
    #[serde(default)]
    alphabet: Option<GroupSpec>,
    #[serde(default)]
    right_alphabet: Option<GroupSpec>,
    mu: MeasureSpec,
    nu: MeasureSpec,
    #[serde(default = "default_l6")]
    l_max: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    id: String,
    kind: Kind,
    #[serde(default)]
    parameters: Value,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenarios: Vec<RawScenario>,
}

/// A validated scenario, ready to run.
pub struct Scenario {
    pub id: String,
    pub kind: Kind,
    pub seed: u64,
    tolerances: BTreeMap<String, f64>,
    task: Task,
}

enum Task {
    ConvolutionEntropy {
        mu: ShiftMeasure,
        nu: ShiftMeasure,
        l_max: usize,
        expected: Option<f64>,
    },
    HaarMaximality {
        haar: ShiftMeasure,
        measures: Vec<ShiftMeasure>,
        l_max: usize,
        min_gap: f64,
    },
    EntropyAddition {
        sys: SkewSystem,
        base: ShiftMeasure,
        l_max: usize,
    },
    Independence {
        mu: DenseMeasure,
    },
    NaturalExtension {
        mu: ShiftMeasure,
        depth: usize,
    },
    ConvolutionErgodicity {
        mu: ShiftMeasure,
        nu: ShiftMeasure,
        cert: DisjointnessCertificate,
        steps: usize,
        seeds: usize,
        expect: Expectation,
    },
    Circle {
        sys: torus::CircleSystem,
        mu: CircleMeasure,
        l: usize,
        symbols: usize,
        depth: u32,
        expected: Option<f64>,
    },
    ProductEntropy {
        mu: ShiftMeasure,
        nu: ShiftMeasure,
        l_max: usize,
    },
}

fn tolerance_keys(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::ConvolutionEntropy => &["entropy", "inequality"],
        Kind::HaarMaximality => &["entropy"],
        Kind::EntropyAddition | Kind::ProductEntropy => &["addition"],
        Kind::NaturalExtension | Kind::Circle => &["entropy"],
        Kind::Independence | Kind::ConvolutionErgodicity => &[],
    }
}

fn parse_params<T: for<'de> Deserialize<'de>>(value: &Value, path: &str, prefix: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Schema {
        path: path.into(),
        field: format!("{prefix}.parameters.{}", e.path()),
        message: e.inner().to_string(),
    })
}

/// Parses and validates a config.
pub fn load_config(path: &Path) -> Result<Vec<Scenario>, ConfigError> {
    let p = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: p.clone(), source })?;
    parse_config(&text, &p)
}

pub fn parse_config(text: &str, path: &str) -> Result<Vec<Scenario>, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
    })?;
    let raw: RawConfig = serde_path_to_error::deserialize(&value).map_err(|e| ConfigError::Schema {
        path: path.into(),
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, s) in raw.scenarios.into_iter().enumerate() {
        let prefix = format!("scenarios[{i}]");
        let schema = |field: &str, message: String| ConfigError::Schema {
            path: path.into(),
            field: format!("{prefix}.{field}"),
            message,
        };
        if !seen.insert(s.id.clone()) {
            return Err(schema("id", format!("duplicate scenario id {:?}", s.id)));
        }
        for key in s.tolerances.keys() {
            if !tolerance_keys(s.kind).contains(&key.as_str()) {
                return Err(schema("tolerances", format!("unknown tolerance {key:?} for {}", s.kind.name())));
            }
        }
        let pv = &s.parameters;
        let task = match s.kind {
            Kind::ConvolutionEntropy => {
                let p: ConvolutionEntropyParams = parse_params(pv, path, &prefix)?;
                let sys = system_for(&p.alphabet, p.sidedness).map_err(|m| schema("parameters.alphabet", m))?;
                Task::ConvolutionEntropy {
                    mu: build_measure(&p.mu, &sys).map_err(|m| schema("parameters.mu", m))?,
                    nu: build_measure(&p.nu, &sys).map_err(|m| schema("parameters.nu", m))?,
                    l_max: p.l_max.max(1),
                    expected: p.expected,
                }
            }
            Kind::HaarMaximality => {
                let p: HaarMaximalityParams = parse_params(pv, path, &prefix)?;
                let sys = system_for(&p.alphabet, p.sidedness).map_err(|m| schema("parameters.alphabet", m))?;
                let measures = p
                    .measures
                    .iter()
                    .enumerate()
                    .map(|(j, m)| build_measure(m, &sys).map_err(|e| schema(&format!("parameters.measures[{j}]"), e)))
                    .collect::<Result<_, _>>()?;
                Task::HaarMaximality {
                    haar: ShiftMeasure::haar(&sys),
                    measures,
                    l_max: p.l_max.max(1),
                    min_gap: p.min_gap,
                }
            }
            Kind::EntropyAddition => {
                let p: EntropyAdditionParams = parse_params(pv, path, &prefix)?;
                let base_sys =
                    system_for(&p.alphabet, SideSpec::OneSided).map_err(|m| schema("parameters.alphabet", m))?;
                let fiber = make_group(&p.fiber).map_err(|e| schema("parameters.fiber", e.to_string()))?;
                let sigma = match &p.sigma {
                    Some(t) => {
                        make_hom(&fiber, &fiber, t.clone()).map_err(|e| schema("parameters.sigma", e.to_string()))?
                    }
                    None => GroupHom::identity(&fiber),
                };
                let n = base_sys.alphabet().order();
                let windows = symbolic::word_count(n, p.window.clamp(1, skew::MAX_WINDOW))
                    .map_err(|e| schema("parameters.window", e.to_string()))?;
                if p.phi.len() != windows {
                    return Err(schema("parameters.phi", format!("expected {windows} values, got {}", p.phi.len())));
                }
                let pairs: Vec<(Vec<usize>, usize)> =
                    p.phi.iter().enumerate().map(|(c, &v)| (symbolic::decode(c, n, p.window), v)).collect();
                let sys = skew::make_skew(&base_sys, &fiber, sigma, p.window, &pairs)
                    .map_err(|e| schema("parameters", e.to_string()))?;
                let base = build_measure(&p.base, &base_sys).map_err(|m| schema("parameters.base", m))?;
                Task::EntropyAddition { sys, base, l_max: p.l_max.max(1) }
            }
            Kind::Independence => {
                let p: IndependenceParams = parse_params(pv, path, &prefix)?;
                let g = make_group(&p.group).map_err(|e| schema("parameters.group", e.to_string()))?;
                let mu = match &p.weights {
                    Some(w) => {
                        DenseMeasure::new(&g, rationals(w)).map_err(|e| schema("parameters.weights", e.to_string()))?
                    }
                    None => haar(&g),
                };
                Task::Independence { mu }
            }
            Kind::NaturalExtension => {
                let p: NaturalExtensionParams = parse_params(pv, path, &prefix)?;
                let sys = system_for(&p.alphabet, SideSpec::OneSided).map_err(|m| schema("parameters.alphabet", m))?;
                Task::NaturalExtension {
                    mu: build_measure(&p.measure, &sys).map_err(|m| schema("parameters.measure", m))?,
                    depth: p.depth.max(1),
                }
            }
            Kind::ConvolutionErgodicity => {
                let p: ConvolutionErgodicityParams = parse_params(pv, path, &prefix)?;
                let sys = system_for(&p.alphabet, SideSpec::OneSided).map_err(|m| schema("parameters.alphabet", m))?;
                if p.steps < ergodicity::MIN_STEPS || p.seeds == 0 {
                    return Err(schema(
                        "parameters.steps",
                        format!("need steps >= {} and seeds >= 1", ergodicity::MIN_STEPS),
                    ));
                }
                Task::ConvolutionErgodicity {
                    mu: build_measure(&p.mu, &sys).map_err(|m| schema("parameters.mu", m))?,
                    nu: build_measure(&p.nu, &sys).map_err(|m| schema("parameters.nu", m))?,
                    cert: p.certificate,
                    steps: p.steps,
                    seeds: p.seeds,
                    expect: p.expect,
                }
            }
            Kind::Circle => {
                let p: CircleParams = parse_params(pv, path, &prefix)?;
                let sys = torus::times_k(p.k).map_err(|e| schema("parameters.k", e.to_string()))?;
                let mu = match &p.measure {
                    CircleMeasureSpec::Lebesgue => CircleMeasure::Lebesgue,
                    CircleMeasureSpec::Periodic(x) => {
                        let (num, den) = (x.0.numer(), x.0.denom());
                        let bad = || schema("parameters.measure", format!("{} is not in [0, 1)", x.0));
                        let num: u64 = num.try_into().map_err(|_| bad())?;
                        let den: u64 = den.try_into().map_err(|_| bad())?;
                        CircleMeasure::periodic(&sys, num, den)
                            .map_err(|e| schema("parameters.measure", e.to_string()))?
                    }
                };
                Task::Circle {
                    sys,
                    mu,
                    l: p.l.max(1),
                    symbols: p.symbols,
                    depth: p.invariance_depth,
                    expected: p.expected,
                }
            }
            Kind::ProductEntropy => {
                let p: ProductEntropyParams = parse_params(pv, path, &prefix)?;
                let left = system_for(&p.alphabet, SideSpec::OneSided).map_err(|m| schema("parameters.alphabet", m))?;
                let right = match &p.right_alphabet {
                    Some(_) => system_for(&p.right_alphabet, SideSpec::OneSided)
                        .map_err(|m| schema("parameters.right_alphabet", m))?,
                    None => left.clone(),
                };
                Task::ProductEntropy {
                    mu: build_measure(&p.mu, &left).map_err(|m| schema("parameters.mu", m))?,
                    nu: build_measure(&p.nu, &right).map_err(|m| schema("parameters.nu", m))?,
                    l_max: p.l_max.max(1),
                }
            }
        };
        out.push(Scenario { id: s.id, kind: s.kind, seed: s.seed, tolerances: s.tolerances, task });
    }
    Ok(out)
}

fn curve(name: &str, est: &EntropyEstimate) -> Plot {
    Plot {
        name: name.into(),
        x: "L".into(),
        y: "h_L".into(),
        points: est.upper_bounds.iter().enumerate().map(|(i, h)| ((i + 1) as f64, *h)).collect(),
    }
}

impl Scenario {
    fn tol(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }

    /// Runs the scenario. Failures inside the computation become a failing
    /// `error` row rather than aborting the suite.
    pub fn run(&self) -> ScenarioReport {
        let mut plots = Vec::new();
        let rows = match self.execute(&mut plots) {
            Ok(rows) => rows,
            Err(message) => {
                log::error!("scenario {}: {message}", self.id);
                vec![Row { pass: false, ..Row::info(format!("error: {message}"), f64::NAN) }]
            }
        };
        ScenarioReport {
            id: self.id.clone(),
            kind: self.kind,
            statement: self.kind.statement(),
            seed: self.seed,
            pass: rows.iter().all(|r| r.pass),
            rows,
            plots,
        }
    }

    fn execute(&self, plots: &mut Vec<Plot>) -> Result<Vec<Row>, String> {
        let e = |x: &dyn std::fmt::Display| x.to_string();
        let mut rows = Vec::new();
        match &self.task {
            Task::ConvolutionEntropy { mu, nu, l_max, expected } => {
                let tol = self.tol("entropy", 1e-9);
                let itol = self.tol("inequality", 1e-9);
                let hm = entropy_rate(mu, *l_max, tol).map_err(|x| e(&x))?;
                let hn = entropy_rate(nu, *l_max, tol).map_err(|x| e(&x))?;
                let conv = convolve_shift(mu, nu).map_err(|x| e(&x))?;
                let hc = entropy_rate(&conv, *l_max, tol).map_err(|x| e(&x))?;
                rows.push(Row::info("h_mu", hm.value));
                rows.push(Row::info("h_nu", hn.value));
                rows.push(match expected {
                    Some(x) => Row::close("h_conv", hc.value, *x, tol),
                    None => Row { lower: hc.lower_bound, pass: hc.converged, ..Row::info("h_conv", hc.value) },
                });
                rows.push(Row::within("subadditivity", hc.value, None, Some(hm.value + hn.value), itol));
                rows.push(Row::within("monotonicity", hc.value, Some(hm.value.max(hn.value)), None, itol));
                if hm.value.abs() <= tol {
                    rows.push(Row::close("zero_entropy_factor", hc.value, hn.value, itol));
                }
                if hn.value.abs() <= tol {
                    rows.push(Row::close("zero_entropy_factor", hc.value, hm.value, itol));
                }
                plots.push(curve("h_conv", &hc));
            }
            Task::HaarMaximality { haar, measures, l_max, min_gap } => {
                let tol = self.tol("entropy", 1e-9);
                let top = (haar.alphabet().order() as f64).ln();
                let hh = entropy_rate(haar, *l_max, tol).map_err(|x| e(&x))?.value;
                rows.push(Row::close("h_haar", hh, top, tol));
                let mut points = Vec::new();
                for (i, mu) in measures.iter().enumerate() {
                    let h = entropy_rate(mu, *l_max, tol).map_err(|x| e(&x))?.value;
                    points.push((i as f64, h));
                    rows.push(Row::within(format!("h[{i}]"), h, None, Some(top), tol));
                    let gap = top - h;
                    let uniform = symbolic::block_distribution(mu, *l_max).map_err(|x| e(&x))?
                        == symbolic::block_distribution(haar, *l_max).map_err(|x| e(&x))?;
                    rows.push(if uniform {
                        Row::close(format!("gap[{i}] equality case"), gap, 0.0, tol)
                    } else {
                        Row::within(format!("gap[{i}]"), gap, Some(*min_gap), None, tol)
                    });
                }
                plots.push(Plot { name: "h_by_measure".into(), x: "measure".into(), y: "h".into(), points });
            }
            Task::EntropyAddition { sys, base, l_max } => {
                let tol = self.tol("addition", skew::ADDITION_TOLERANCE);
                let rep = skew::entropy_addition_report(sys, base).map_err(|x| e(&x))?;
                let est = skew::skew_entropy(sys, &skew::haar_extension(base, sys).map_err(|x| e(&x))?, *l_max)
                    .map_err(|x| e(&x))?;
                rows.push(Row::info("h_base", rep.base_entropy));
                rows.push(Row::info("h_fiber", rep.fiber_entropy));
                rows.push(Row::info("h_skew", rep.skew_entropy));
                rows.push(Row::close("addition", rep.skew_entropy, rep.base_entropy + rep.fiber_entropy, tol));
                plots.push(curve("h_pair_process", &est));
            }
            Task::Independence { mu } => {
                let rep = independence_check(mu);
                let is_haar = mu.is_haar();
                rows.push(Row::flag("is_haar", is_haar, true));
                rows.push(Row::flag("independent", rep.independent, rep.independent == is_haar));
                rows.push(Row::flag("exhaustive", rep.exhaustive, true));
            }
            Task::NaturalExtension { mu, depth } => {
                let tol = self.tol("entropy", 1e-12);
                let rep = symbolic::verify_extension(mu, *depth).map_err(|x| e(&x))?;
                rows.push(Row { pass: rep.pass, ..Row::info("windows_checked", rep.windows_checked as f64) });
                let ext = symbolic::natural_extension(mu).map_err(|x| e(&x))?;
                let mut worst: f64 = 0.0;
                let mut points = Vec::new();
                for len in 1..=*depth {
                    let a = entropy::block_entropy(mu, len).map_err(|x| e(&x))?;
                    let b = entropy::block_entropy(&ext, len).map_err(|x| e(&x))?;
                    worst = worst.max((a - b).abs());
                    points.push((len as f64, a));
                }
                rows.push(Row::close("block_entropy_difference", worst, 0.0, tol));
                let ha = entropy_rate(mu, *depth, tol).map_err(|x| e(&x))?.value;
                let hb = entropy_rate(&ext, *depth, tol).map_err(|x| e(&x))?.value;
                rows.push(Row::info("h_one_sided", ha));
                rows.push(Row::close("h_two_sided", hb, ha, tol));
                plots.push(Plot { name: "block_entropy".into(), x: "L".into(), y: "H_L".into(), points });
            }
            Task::ConvolutionErgodicity { mu, nu, cert, steps, seeds, expect } => {
                let params = ScenarioParams { steps: *steps, seeds: *seeds, base_seed: self.seed, observables: None };
                match (ergodicity::convolution_ergodicity_scenario(mu, nu, cert, &params), expect) {
                    (Ok(rep), _) => {
                        rows.push(Row::flag("left_ergodic", true, true));
                        rows.push(Row::flag("right_ergodic", true, true));
                        rows.push(Row::flag("certificate_verified", rep.certificate_verified, true));
                        rows.push(Row::flag("convolution_invariant", rep.invariant, rep.invariant));
                        let mut points = Vec::new();
                        for (i, o) in rep.birkhoff.observables.iter().enumerate() {
                            points.push((i as f64, o.mean));
                            rows.push(Row {
                                quantity: format!("mean[{}@{}]", o.window, o.start),
                                value: o.mean,
                                lower: Some(o.exact - o.bound),
                                upper: Some(o.exact + o.bound),
                                tolerance: Some(o.bound),
                                pass: o.matches,
                            });
                        }
                        rows.push(Row::within(
                            "max_dispersion",
                            rep.birkhoff.max_dispersion,
                            None,
                            Some(rep.birkhoff.threshold),
                            0.0,
                        ));
                        let ergodic = rep.verdict == Verdict::Ergodic;
                        rows.push(Row::flag(
                            "ergodic_consistent",
                            ergodic,
                            ergodic == (*expect == Expectation::Ergodic),
                        ));
                        plots.push(Plot {
                            name: "birkhoff_means".into(),
                            x: "observable".into(),
                            y: "mean".into(),
                            points,
                        });
                    }
                    (Err(ErgodicityError::FactorNotErgodic { factor, .. }), Expectation::FactorNotErgodic) => {
                        rows.push(Row::flag(format!("rejected: {factor} factor not ergodic"), true, true));
                    }
                    (Err(ErgodicityError::CertificateInvalid(why)), Expectation::CertificateInvalid) => {
                        rows.push(Row::flag(format!("rejected: certificate invalid ({why})"), true, true));
                    }
                    (Err(other), _) => return Err(other.to_string()),
                }
            }
            Task::Circle { sys, mu, l, symbols, depth, expected } => {
                let invariant = torus::haar_invariance_check(sys, *depth).map_err(|x| e(&x))?;
                rows.push(Row::flag("lebesgue_invariant", invariant, invariant));
                let top = (sys.k() as f64).ln();
                let (target, default_tol) = match mu {
                    CircleMeasure::Lebesgue => (expected.unwrap_or(top), 0.02),
                    CircleMeasure::PeriodicAtomic { .. } => (expected.unwrap_or(0.0), 1e-12),
                };
                let tol = self.tol("entropy", default_tol);
                let est = torus::circle_entropy_report(sys, mu, *l, *symbols, self.seed).map_err(|x| e(&x))?;
                rows.push(Row::close("h", est.value, target, tol));
                rows.push(Row::within("h_below_lebesgue", est.value, None, Some(top), tol));
                plots.push(curve("h_L", &est));
            }
            Task::ProductEntropy { mu, nu, l_max } => {
                let tol = self.tol("addition", skew::ADDITION_TOLERANCE);
                let rep = skew::product_entropy_check(mu, nu, *l_max).map_err(|x| e(&x))?;
                let prod = skew::product_system(mu, nu).map_err(|x| e(&x))?;
                let est = block_entropy_rate(&prod, *l_max, tol).map_err(|x| e(&x))?;
                rows.push(Row::info("h_left", rep.left));
                rows.push(Row::info("h_right", rep.right));
                rows.push(Row::close("h_product", rep.product, rep.left + rep.right, tol));
                plots.push(curve("h_product", &est));
            }
        }
        Ok(rows)
    }
}

/// Runs scenarios (in parallel) and assembles the report in config order.
/// `seed_override` replaces every scenario's seed.
pub fn run_all(mut scenarios: Vec<Scenario>, seed_override: Option<u64>) -> Report {
    if let Some(seed) = seed_override {
        for s in &mut scenarios {
            s.seed = seed;
        }
    }
    let reports: Vec<ScenarioReport> = scenarios
        .par_iter()
        .map(|s| {
            log::info!("running {} ({})", s.id, s.kind.name());
            s.run()
        })
        .collect();
    Report { pass: reports.iter().all(|r| r.pass), scenarios: reports }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(out: W, report: &Report) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario_id", "quantity", "value", "lower", "upper", "tolerance", "pass"])?;
    for s in &report.scenarios {
        for r in &s.rows {
            w.write_record([
                s.id.clone(),
                r.quantity.clone(),
                r.value.to_string(),
                opt(r.lower),
                opt(r.upper),
                opt(r.tolerance),
                r.pass.to_string(),
            ])?;
        }
    }
    w.flush()
}

/// Writes `out` (CSV), its sibling `.json`, and one two-column CSV per plot
/// named `<stem>.<scenario>.<plot>.csv`. Returns every path written.
pub fn write_report(out: &Path, report: &Report) -> io::Result<Vec<PathBuf>> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut written = vec![out.to_path_buf()];
    write_csv(fs::File::create(out)?, report)?;
    let json_path = out.with_extension("json");
    let mut json = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(&json_path, json)?;
    written.push(json_path);
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    for s in &report.scenarios {
        for p in &s.plots {
            let path = out.with_file_name(format!("{stem}.{}.{}.csv", s.id, p.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record([p.x.as_str(), p.y.as_str()])?;
            for (x, y) in &p.points {
                w.write_record([x.to_string(), y.to_string()])?;
            }
            w.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(kind: &str, params: &str) -> String {
        format!(r#"{{"scenarios": [{{"id": "s", "kind": "{kind}", "parameters": {params}}}]}}"#)
    }

    #[test]
    fn convolution_entropy_row() {
        let cfg = one(
            "convolution_entropy",
            r#"{"mu": {"type": "bernoulli", "weights": ["3/4", "1/4"]},
                "nu": {"type": "bernoulli", "weights": ["3/4", "1/4"]}, "expected": 0.6615632381579821}"#,
        );
        let report = run_all(parse_config(&cfg, "t").unwrap(), None);
        let row = &report.scenarios[0].rows[2];
        assert_eq!(row.quantity, "h_conv");
        assert!((row.value - 0.661563).abs() < 1e-6);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_config("{\n  \"scenarios\": [\n    {,]}", "bad.json").err().unwrap();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn decimal_probabilities_are_schema_errors() {
        let cfg = one("independence", r#"{"group": {"cyclic": 2}, "weights": [0.5, 0.5]}"#);
        let err = parse_config(&cfg, "t").err().unwrap().to_string();
        assert!(err.contains("scenarios[0].parameters.weights[0]"), "{err}");
        assert!(err.contains("rational strings"), "{err}");
    }

    #[test]
    fn unknown_fields_and_duplicates() {
        let cfg = one("independence", r#"{"group": {"cyclic": 2}, "colour": 1}"#);
        assert!(matches!(parse_config(&cfg, "t"), Err(ConfigError::Schema { .. })));
        let dup = r#"{"scenarios": [{"id": "a", "kind": "independence", "parameters": {"group": {"cyclic": 2}}},
                                    {"id": "a", "kind": "independence", "parameters": {"group": {"cyclic": 3}}}]}"#;
        let err = parse_config(dup, "t").err().unwrap().to_string();
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn haar_equality_case() {
        let cfg = one(
            "haar_maximality",
            r#"{"measures": [{"type": "haar"}, {"type": "bernoulli", "weights": ["1/10", "9/10"]}], "min_gap": 0.001}"#,
        );
        let report = run_all(parse_config(&cfg, "t").unwrap(), None);
        let rows = &report.scenarios[0].rows;
        assert!(rows.iter().any(|r| r.quantity == "gap[0] equality case" && r.value == 0.0 && r.pass));
        assert!(report.pass);
    }

    #[test]
    fn csv_is_deterministic() {
        let cfg = one("independence", r#"{"group": {"cyclic": 3}, "weights": ["1/2", "1/3", "1/6"]}"#);
        let render = || {
            let mut buf = Vec::new();
            write_csv(&mut buf, &run_all(parse_config(&cfg, "t").unwrap(), Some(4))).unwrap();
            buf
        };
        let a = render();
        assert_eq!(a, render());
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("scenario_id,quantity,value,lower,upper,tolerance,pass\n"));
        assert!(text.contains("s,independent,0,,,,true"));
    }

    #[test]
    fn list_mentions_every_kind() {
        let text = list_text();
        for k in Kind::ALL {
            assert!(text.contains(k.name()));
        }
        assert_eq!(text, list_text());
    }
}
