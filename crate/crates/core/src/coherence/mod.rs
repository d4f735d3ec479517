//! Dephasing of the m_s = 0 ↔ dressed ±1 transition by Ornstein-Uhlenbeck
//! magnetic (b_z) and transverse electric (e_y) noise.
//!
//! In the linear-response regime the transition frequency fluctuates as
//! δω = R_b·(g μ_B/ħ)·b_z + R_e·(d⊥/ħ)·e_y, with the sensitivity factors
//! R_b, R_e set by the bias fields. Everything downstream (envelopes, T₂
//! laws, Monte Carlo) is built on that.

mod envelope;
mod mc;

use std::f64::consts::{SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::noise::OuParams;
use crate::params::NvParameters;
use crate::{Error, Result};

pub use envelope::{
    echo_envelope_analytic, echo_exponent, echo_shape, fid_envelope_analytic, fid_exponent, fid_shape,
};
pub use mc::{sequence_phases, simulate_sequence_mc, step_rule, McOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    Ramsey,
    HahnEcho,
}

impl std::str::FromStr for SequenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ramsey" | "fid" => Ok(SequenceKind::Ramsey),
            "hahn_echo" | "echo" => Ok(SequenceKind::HahnEcho),
            other => Err(Error::invalid(format!("unknown sequence kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaOmegaMode {
    Exact,
    #[default]
    Linearized,
}

/// Bias fields, both noise channels and the NV couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEnvironment {
    /// Axial bias field, T.
    pub b_z: f64,
    /// Transverse electric field, V/m.
    pub e_perp: f64,
    /// b_z(t) channel; sigma in T.
    pub magnetic: OuParams,
    /// e_y(t) channel; sigma in V/m.
    pub electric: OuParams,
    pub params: NvParameters,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityFactors {
    pub r_b: f64,
    pub r_e: f64,
}

impl NoiseEnvironment {
    pub fn magnetic_only(params: NvParameters, b_z: f64, e_perp: f64, magnetic: OuParams) -> Self {
        Self { b_z, e_perp, magnetic, electric: OuParams::silent(), params }
    }

    pub fn with_e_perp(mut self, e_perp: f64) -> Self {
        self.e_perp = e_perp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.magnetic.validate()?;
        self.electric.validate()?;
        if !self.b_z.is_finite() {
            return Err(Error::invalid("B_z must be finite"));
        }
        if !(self.e_perp.is_finite() && self.e_perp >= 0.0) {
            return Err(Error::invalid(format!("E_perp must be finite and >= 0, got {}", self.e_perp)));
        }
        Ok(())
    }

    /// Zeeman bias g μ_B B_z / ħ, rad/s.
    pub fn zeeman_rate(&self) -> f64 {
        TAU * self.params.zeeman_hz_per_tesla() * self.b_z
    }

    /// Stark bias d⊥ E⊥ / ħ, rad/s.
    pub fn stark_rate(&self) -> f64 {
        TAU * self.params.d_perp_hz_per_v_per_m * self.e_perp
    }

    /// Half the dressed splitting, sqrt(zeeman² + stark²), rad/s.
    pub fn bias_rate(&self) -> f64 {
        self.zeeman_rate().hypot(self.stark_rate())
    }

    /// Magnetic noise amplitude g μ_B b_z^σ / ħ, rad/s.
    pub fn magnetic_sigma_rate(&self) -> f64 {
        TAU * self.params.zeeman_hz_per_tesla() * self.magnetic.sigma
    }

    /// Electric noise amplitude d⊥ e_y^σ / ħ, rad/s.
    pub fn electric_sigma_rate(&self) -> f64 {
        TAU * self.params.d_perp_hz_per_v_per_m * self.electric.sigma
    }

    /// Normalized transverse field d⊥E⊥ / (g μ_B B_z).
    pub fn normalized_field(&self) -> f64 {
        self.stark_rate() / self.zeeman_rate()
    }

    /// True when the bias splitting exceeds every noise amplitude tenfold,
    /// where the linearized δω is accurate.
    pub fn in_linear_regime(&self) -> bool {
        self.bias_rate() >= 10.0 * self.magnetic_sigma_rate().max(self.electric_sigma_rate())
    }

    /// Effective angular-frequency noise amplitudes (R_b ω_b^σ, R_e ω_e^σ).
    pub fn channel_rates(&self) -> Result<(f64, f64)> {
        let r = sensitivity_factors(self)?;
        Ok(((r.r_b * self.magnetic_sigma_rate()).abs(), (r.r_e * self.electric_sigma_rate()).abs()))
    }
}

/// R_b = g μ_B B_z / Ω and R_e = d⊥E⊥ / Ω with Ω the bias splitting.
pub fn sensitivity_factors(env: &NoiseEnvironment) -> Result<SensitivityFactors> {
    let zb = env.zeeman_rate();
    let ze = env.stark_rate();
    let denom = zb.hypot(ze);
    if denom == 0.0 {
        return Err(Error::ZeroBias);
    }
    Ok(SensitivityFactors { r_b: zb / denom, r_e: ze / denom })
}

/// Transition-frequency shift (rad/s) caused by field excursions `b` (T) along
/// z and `e` (V/m) along the transverse field.
pub fn delta_omega(b: f64, e: f64, env: &NoiseEnvironment, mode: DeltaOmegaMode) -> Result<f64> {
    let beta = TAU * env.params.zeeman_hz_per_tesla() * b;
    let eps = TAU * env.params.d_perp_hz_per_v_per_m * e;
    match mode {
        DeltaOmegaMode::Linearized => {
            let r = sensitivity_factors(env)?;
            Ok(r.r_b * beta + r.r_e * eps)
        }
        DeltaOmegaMode::Exact => {
            let zb = env.zeeman_rate();
            let ze = env.stark_rate();
            let before = zb.hypot(ze);
            let after = (zb + beta).hypot(ze + eps);
            // difference of square roots without cancellation
            let numer = beta * (2.0 * zb + beta) + eps * (2.0 * ze + eps);
            let denom = after + before;
            if denom == 0.0 {
                return Ok(0.0);
            }
            Ok(numer / denom)
        }
    }
}

/// Gaussian-decay FID time √2 / rate for a quasi-static rate amplitude.
fn fid_time(rate: f64) -> f64 {
    if rate == 0.0 {
        f64::INFINITY
    } else {
        SQRT_2 / rate
    }
}

/// Cubic-decay echo time (12 τ_c / rate²)^{1/3}.
fn echo_time(rate: f64, tau_c: f64) -> f64 {
    if rate == 0.0 {
        f64::INFINITY
    } else {
        (12.0 * tau_c / (rate * rate)).cbrt()
    }
}

fn finite_or_infinite(t: f64) -> Result<f64> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(Error::InfiniteCoherence)
    }
}

/// FID coherence time limited by the magnetic channel: √2 ħ / (R_b g μ_B b_z^σ).
pub fn t2_fid_magnetic(env: &NoiseEnvironment) -> Result<f64> {
    env.validate()?;
    let (rb, _) = env.channel_rates()?;
    finite_or_infinite(fid_time(rb))
}

/// Echo coherence time limited by the magnetic channel:
/// (12 τ_c^b (ħ / (R_b g μ_B b_z^σ))²)^{1/3}.
pub fn t2_echo_magnetic(env: &NoiseEnvironment) -> Result<f64> {
    env.validate()?;
    let (rb, _) = env.channel_rates()?;
    finite_or_infinite(echo_time(rb, env.magnetic.tau_c))
}

/// Echo coherence time limited by the electric channel alone.
pub fn t2_echo_electric(env: &NoiseEnvironment) -> Result<f64> {
    env.validate()?;
    let (_, re) = env.channel_rates()?;
    finite_or_infinite(echo_time(re, env.electric.tau_c))
}

/// FID time with both channels: √2 ħ / sqrt((R_b g μ_B b^σ)² + (R_e d⊥ e^σ)²).
pub fn t2_fid_combined(env: &NoiseEnvironment) -> Result<f64> {
    env.validate()?;
    let (rb, re) = env.channel_rates()?;
    finite_or_infinite(fid_time(rb.hypot(re)))
}

/// Echo time with both channels, T_b T_e / (T_b³ + T_e³)^{1/3}; an absent
/// channel contributes an infinite partial time.
pub fn t2_echo_combined(env: &NoiseEnvironment) -> Result<f64> {
    env.validate()?;
    let (rb, re) = env.channel_rates()?;
    let tb = echo_time(rb, env.magnetic.tau_c);
    let te = echo_time(re, env.electric.tau_c);
    finite_or_infinite(combine_echo_times(tb, te))
}

/// Cube-law combination 1/T³ = 1/T_b³ + 1/T_e³.
pub fn combine_echo_times(tb: f64, te: f64) -> f64 {
    if te.is_infinite() {
        return tb;
    }
    if tb.is_infinite() {
        return te;
    }
    let inv = tb.powi(-3) + te.powi(-3);
    if inv == 0.0 {
        f64::INFINITY
    } else {
        inv.powf(-1.0 / 3.0)
    }
}

/// Monte Carlo or analytic decay data for one pulse sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub sequence_kind: SequenceKind,
    /// τ for Ramsey, total free evolution 2τ for Hahn echo; s.
    pub times: Vec<f64>,
    /// Probability of m_s = 0.
    pub population: Vec<f64>,
    /// Standard error of each population (0 for analytic curves).
    pub mc_std_error: Vec<f64>,
    pub n_realizations: usize,
    pub seed: u64,
}

impl DecayCurve {
    pub fn analytic(kind: SequenceKind, times: &[f64], env: &NoiseEnvironment) -> Result<Self> {
        let population = times
            .iter()
            .map(|&t| match kind {
                SequenceKind::Ramsey => fid_envelope_analytic(t, env),
                SequenceKind::HahnEcho => echo_envelope_analytic(t, env),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sequence_kind: kind,
            times: times.to_vec(),
            mc_std_error: vec![0.0; times.len()],
            population,
            n_realizations: 0,
            seed: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}
