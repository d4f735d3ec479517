use serde::{Deserialize, Serialize};

use super::lm::{Bounds, FitResult, LmOptions, Problem};
use crate::{Error, Result};

pub const MIN_DECAY_POINTS: usize = 5;

/// y₀ + A·exp(−(t/T₂)^n) fitted to a decay curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub y0: f64,
    pub amplitude: f64,
    pub t2: f64,
    pub exponent: f64,
    /// False when the time grid does not cover [0.3·T₂, 2·T₂].
    pub span_ok: bool,
    pub fit: FitResult,
}

fn check(times: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<()> {
    if times.len() != y.len() || sigma.is_some_and(|s| s.len() != y.len()) {
        return Err(Error::invalid("decay data columns differ in length"));
    }
    if times.len() < MIN_DECAY_POINTS {
        return Err(Error::invalid(format!("a decay fit needs at least {MIN_DECAY_POINTS} points, got {}", times.len())));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 0.0 {
        return Err(Error::invalid("decay times must be >= 0 and strictly increasing"));
    }
    Ok(())
}

/// Starting values: plateau from the last point, amplitude from the first,
/// T₂ from the first 1/e crossing.
fn initial_guess(times: &[f64], y: &[f64], exponent: f64) -> [f64; 3] {
    let y0 = y[y.len() - 1];
    let a = y[0] - y0;
    let target = a.abs() / std::f64::consts::E;
    let mut t2 = times[times.len() - 1];
    for k in 1..y.len() {
        let (d0, d1) = ((y[k - 1] - y0).abs(), (y[k] - y0).abs());
        if d1 <= target && d0 > target {
            let f = (d0 - target) / (d0 - d1);
            t2 = times[k - 1] + f * (times[k] - times[k - 1]);
            break;
        }
    }
    // undo the partial decay already present at the first sample
    let a = a * ((times[0] / t2).powf(exponent)).exp().min(10.0);
    [y0, if a == 0.0 { 1e-3 } else { a }, t2.max(f64::MIN_POSITIVE)]
}

fn fit_fixed(times: &[f64], y: &[f64], sigma: Option<&[f64]>, exponent: f64, opts: &LmOptions) -> Result<DecayFit> {
    check(times, y, sigma)?;
    let init = initial_guess(times, y, exponent);
    let model = |p: &[f64]| Ok(times.iter().map(|&t| p[0] + p[1] * (-(t / p[2]).powf(exponent)).exp()).collect());
    let mut bounds = Bounds::unbounded(3);
    bounds.lower[2] = 0.0;
    let problem = Problem::new(model, y, &["y0", "amplitude", "t2"]).weighted(sigma).bounded(bounds);
    let fit = super::lm::solve(&problem, &init, opts)?;
    let t2 = fit.params[2];
    Ok(DecayFit {
        y0: fit.params[0],
        amplitude: fit.params[1],
        t2,
        exponent,
        span_ok: times[0] <= 0.3 * t2 && times[times.len() - 1] >= 2.0 * t2,
        fit,
    })
}

/// Gaussian free-induction decay y₀ + A·exp(−(τ/T₂)²).
pub fn fit_fid_decay(times: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<DecayFit> {
    fit_fixed(times, y, sigma, 2.0, &LmOptions::default())
}

/// Echo decay y₀ + A·exp(−(2τ/T₂)³); `times` are total times 2τ.
pub fn fit_echo_decay(times: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<DecayFit> {
    fit_fixed(times, y, sigma, 3.0, &LmOptions::default())
}

/// Diagnostic fit with the stretching exponent free.
pub fn fit_decay_free_exponent(times: &[f64], y: &[f64], sigma: Option<&[f64]>, exponent_init: f64) -> Result<DecayFit> {
    let base = fit_fixed(times, y, sigma, exponent_init, &LmOptions::default())?;
    let model = |p: &[f64]| Ok(times.iter().map(|&t| p[0] + p[1] * (-(t / p[2]).powf(p[3])).exp()).collect());
    let mut bounds = Bounds::unbounded(4);
    bounds.lower[2] = 0.0;
    bounds.lower[3] = 0.1;
    bounds.upper[3] = 10.0;
    let problem = Problem::new(model, y, &["y0", "amplitude", "t2", "exponent"]).weighted(sigma).bounded(bounds);
    let init = [base.y0, base.amplitude, base.t2, exponent_init];
    let fit = super::lm::solve(&problem, &init, &LmOptions::default())?;
    let t2 = fit.params[2];
    Ok(DecayFit {
        y0: fit.params[0],
        amplitude: fit.params[1],
        t2,
        exponent: fit.params[3],
        span_ok: times[0] <= 0.3 * t2 && times[times.len() - 1] >= 2.0 * t2,
        fit,
    })
}
