//! Closed-form ensemble averages of the Ramsey and Hahn-echo signals under
//! Gaussian OU frequency noise.

use super::NoiseEnvironment;
use crate::{Error, Result};

/// Below this τ/τ_c the shape functions switch to their power series, where
/// the closed forms lose digits to cancellation.
const SERIES_CUTOFF: f64 = 0.5;
const SERIES_TERMS: i32 = 40;

/// x − 1 + e^{−x}; the FID phase variance is 2·σ²τ_c²·fid_shape(τ/τ_c).
pub fn fid_shape(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        // Σ_{n≥2} (−x)^n / n!
        let mut term = x * x / 2.0;
        let mut sum = term;
        for n in 3..=SERIES_TERMS {
            term *= -x / f64::from(n);
            sum += term;
        }
        sum
    } else {
        x + (-x).exp_m1()
    }
}

/// 2x − 3 − e^{−2x} + 4e^{−x}, the echo counterpart of [`fid_shape`]
/// (x = τ/τ_c with 2τ the total evolution time).
pub fn echo_shape(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        // Σ_{n≥3} (−1)^n (4 − 2^n) x^n / n!
        let mut sum = 0.0;
        let mut xn_over_fact = x * x / 2.0; // x^2/2!
        for n in 3..=SERIES_TERMS {
            xn_over_fact *= x / f64::from(n);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (4.0 - 2f64.powi(n)) * xn_over_fact;
        }
        sum
    } else {
        2.0 * x - (-2.0 * x).exp_m1() + 4.0 * (-x).exp_m1()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("evolution time must be finite and >= 0, got {t}")))
    }
}

fn channels(env: &NoiseEnvironment) -> Result<[(f64, f64); 2]> {
    env.validate()?;
    let (rb, re) = env.channel_rates()?;
    Ok([(rb, env.magnetic.tau_c), (re, env.electric.tau_c)])
}

/// Decoherence exponent χ(τ) of the Ramsey signal, summed over channels.
pub fn fid_exponent(tau: f64, env: &NoiseEnvironment) -> Result<f64> {
    check_time(tau)?;
    Ok(channels(env)?
        .iter()
        .filter(|(rate, _)| *rate > 0.0)
        .map(|&(rate, tc)| tc * tc * rate * rate * fid_shape(tau / tc))
        .sum())
}

/// Decoherence exponent of the Hahn-echo signal at total time 2τ.
pub fn echo_exponent(two_tau: f64, env: &NoiseEnvironment) -> Result<f64> {
    check_time(two_tau)?;
    let tau = two_tau / 2.0;
    Ok(channels(env)?
        .iter()
        .filter(|(rate, _)| *rate > 0.0)
        .map(|&(rate, tc)| tc * tc * rate * rate * echo_shape(tau / tc))
        .sum())
}

/// m_s = 0 population after a Ramsey sequence with free evolution τ:
/// 1/2 − exp(−χ)/2, starting at 0.
pub fn fid_envelope_analytic(tau: f64, env: &NoiseEnvironment) -> Result<f64> {
    Ok(0.5 - 0.5 * (-fid_exponent(tau, env)?).exp())
}

/// m_s = 0 population after a Hahn echo with total evolution 2τ:
/// 1/2 + exp(−χ)/2, starting at 1.
pub fn echo_envelope_analytic(two_tau: f64, env: &NoiseEnvironment) -> Result<f64> {
    Ok(0.5 + 0.5 * (-echo_exponent(two_tau, env)?).exp())
}
