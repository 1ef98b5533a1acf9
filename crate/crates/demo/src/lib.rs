//! Browser bindings for `www/index.html`: entropy curves of binary shift
//! measures, exact Bernoulli convolution, and circle itineraries.
//!
//! Each export is a thin wrapper over a plain function so the logic can be
//! tested natively.

use ergolab::entropy::{conditional_entropies, entropy_rate, shannon};
use ergolab::finite_group::{convolve, DenseMeasure, FiniteGroup};
use ergolab::rational::{parse_rational, Rational};
use ergolab::symbolic::{convolve_shift, ShiftMeasure, ShiftSystem};
use ergolab::torus::{symbolic_coding, times_k, StartPoint};
use num_traits::One;
use wasm_bindgen::prelude::*;

/// Largest block length offered by the page; exact tables beyond this get slow.
pub const MAX_BLOCK: usize = 12;

fn binary() -> ShiftSystem {
    ShiftSystem::one_sided(&FiniteGroup::cyclic(2).expect("cyclic group"))
}

fn prob(s: &str) -> Result<Rational, String> {
    let p = parse_rational(s)?;
    if p < Rational::from_integer(0.into()) || p > Rational::one() {
        return Err(format!("{s} is not a probability"));
    }
    Ok(p)
}

fn term(text: &str, sys: &ShiftSystem) -> Result<ShiftMeasure, String> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let e = |x: ergolab::symbolic::SymbolicError| x.to_string();
    match words.as_slice() {
        ["haar"] => Ok(ShiftMeasure::haar(sys)),
        ["bernoulli", p] => {
            let p = prob(p)?;
            ShiftMeasure::bernoulli_weights(sys, vec![Rational::one() - &p, p]).map_err(e)
        }
        ["markov", a, b] => {
            let (a, b) = (prob(a)?, prob(b)?);
            let rows = vec![vec![Rational::one() - &a, a], vec![b.clone(), Rational::one() - &b]];
            ShiftMeasure::markov(sys, rows, None).map_err(e)
        }
        ["periodic", word] => {
            let symbols = word
                .chars()
                .map(|c| c.to_digit(2).map(|d| d as usize).ok_or_else(|| format!("{word} is not a binary word")))
                .collect::<Result<Vec<_>, _>>()?;
            ShiftMeasure::periodic(sys, symbols).map_err(e)
        }
        _ => Err(format!("cannot read {text:?}; use `haar`, `bernoulli p`, `markov a b` or `periodic 0110`")),
    }
}

/// Parses `term (* term)*` over the binary alphabet, where `*` is
/// convolution and `markov a b` has switching probabilities `a` (0 to 1)
/// and `b` (1 to 0).
pub fn parse_measure(text: &str) -> Result<ShiftMeasure, String> {
    let sys = binary();
    let mut parts = text.split('*');
    let mut mu = term(parts.next().unwrap_or(""), &sys)?;
    for p in parts {
        mu = convolve_shift(&mu, &term(p, &sys)?).map_err(|e| e.to_string())?;
    }
    Ok(mu)
}

/// `h_1, ..., h_L` followed by the entropy-rate estimate.
pub fn entropy_curve_values(text: &str, l_max: usize) -> Result<Vec<f64>, String> {
    let l_max = l_max.clamp(1, MAX_BLOCK);
    let mu = parse_measure(text)?;
    let mut out = conditional_entropies(&mu, l_max).map_err(|e| e.to_string())?;
    out.push(entropy_rate(&mu, l_max, 1e-9).map_err(|e| e.to_string())?.value);
    Ok(out)
}

/// Exact law of `X + Y mod 2` for independent `X ~ Bernoulli(p)` and
/// `Y ~ Bernoulli(q)`, with the three entropies.
pub fn bernoulli_convolution_text(p: &str, q: &str) -> Result<String, String> {
    let g = FiniteGroup::cyclic(2).expect("cyclic group");
    let dense = |p: &Rational| DenseMeasure::new(&g, vec![Rational::one() - p, p.clone()]).map_err(|e| e.to_string());
    let (p, q) = (prob(p)?, prob(q)?);
    let c = convolve(&dense(&p)?, &dense(&q)?).map_err(|e| e.to_string())?;
    let r = c.weights()[1].clone();
    let h = |x: &Rational| shannon(&[Rational::one() - x, x.clone()]);
    Ok(format!("P(1) = {r}\nh(mu) = {:.6}\nh(nu) = {:.6}\nh(mu*nu) = {:.6}", h(&p), h(&q), h(&r)))
}

/// First `n` digits of `x0` under `x -> kx mod 1`.
pub fn itinerary_text(k: u32, x0: &str, n: usize) -> Result<String, String> {
    let sys = times_k(u64::from(k)).map_err(|e| e.to_string())?;
    let x = parse_rational(x0)?;
    let coding = symbolic_coding(&sys, &StartPoint::Rational(x), n.min(10_000));
    let radix = k.min(36);
    Ok(coding.word.iter().map(|&d| char::from_digit(d as u32, radix).unwrap_or('?')).collect())
}

#[wasm_bindgen]
pub fn entropy_curve(measure: &str, l_max: usize) -> Result<Vec<f64>, JsError> {
    entropy_curve_values(measure, l_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bernoulli_convolution(p: &str, q: &str) -> Result<String, JsError> {
    bernoulli_convolution_text(p, q).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn circle_itinerary(k: u32, x0: &str, n: usize) -> Result<String, JsError> {
    itinerary_text(k, x0, n).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_curve_matches_closed_form() {
        let curve = entropy_curve_values("bernoulli 1/4 * bernoulli 1/4", 4).unwrap();
        let oracle = -(0.375f64 * 0.375f64.ln() + 0.625 * 0.625f64.ln());
        assert_eq!(curve.len(), 5);
        for h in curve {
            assert!((h - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_convolution_drops_to_bernoulli_rate() {
        let curve = entropy_curve_values("bernoulli 1/4 * periodic 01", 10).unwrap();
        let target = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        assert!((curve.last().unwrap() - target).abs() < 1e-6);
    }

    #[test]
    fn markov_and_errors() {
        let curve = entropy_curve_values("markov 1/2 1/2", 3).unwrap();
        assert!((curve[2] - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(entropy_curve_values("bernoulli 0.3", 3).is_err());
        assert!(entropy_curve_values("poisson 1", 3).is_err());
        assert!(entropy_curve_values("periodic 012", 3).is_err());
    }

    #[test]
    fn bernoulli_convolution_exact() {
        let text = bernoulli_convolution_text("1/4", "1/4").unwrap();
        assert!(text.starts_with("P(1) = 3/8\n"), "{text}");
        assert!(text.contains("h(mu*nu) = 0.661563"));
        assert!(bernoulli_convolution_text("5/4", "1/4").is_err());
    }

    #[test]
    fn itineraries() {
        assert_eq!(itinerary_text(2, "1/3", 6).unwrap(), "010101");
        assert_eq!(itinerary_text(3, "1/2", 4).unwrap(), "1111");
        assert!(itinerary_text(1, "1/3", 4).is_err());
    }
}
