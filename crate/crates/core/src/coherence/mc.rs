//! Monte Carlo Ramsey / Hahn-echo simulation over sampled OU noise paths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{delta_omega, sensitivity_factors, DecayCurve, DeltaOmegaMode, NoiseEnvironment, SequenceKind};
use crate::noise::{fill_ou_path, stream_rng};
use crate::{Error, Result};

pub const MIN_REALIZATIONS: usize = 100;
/// Realizations per work unit. Partial sums are formed per chunk and then
/// reduced in chunk order, so serial and parallel runs agree bit for bit.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    /// Integration step; `None` picks the largest step the resolution rule allows.
    pub dt: Option<f64>,
    pub parallel: bool,
    pub mode: DeltaOmegaMode,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { dt: None, parallel: true, mode: DeltaOmegaMode::Linearized }
    }
}

/// Largest admissible time step: min(τ_c/100 over active channels,
/// t_max/1000, 0.1 / max|δω|) with max|δω| estimated at five standard
/// deviations of each channel.
pub fn step_rule(env: &NoiseEnvironment, t_max: f64) -> Result<f64> {
    let mut dt = t_max / 1000.0;
    let (rb, re) = env.channel_rates()?;
    if rb > 0.0 {
        dt = dt.min(env.magnetic.tau_c / 100.0);
    }
    if re > 0.0 {
        dt = dt.min(env.electric.tau_c / 100.0);
    }
    let peak = 5.0 * (rb + re);
    if peak > 0.0 {
        dt = dt.min(0.1 / peak);
    }
    Ok(dt)
}

/// Simulates `n_realizations` independent runs of a pulse sequence.
///
/// `times` are the free-evolution τ for Ramsey and the total time 2τ for the
/// echo. Each realization draws one magnetic and one electric OU path on a
/// common grid covering the longest time; the accumulated phase is the
/// trapezoidal integral of δω(t), interpolated linearly between samples. For
/// the echo the π pulse at τ flips the sign of the second half.
pub fn simulate_sequence_mc(
    kind: SequenceKind,
    times: &[f64],
    env: &NoiseEnvironment,
    n_realizations: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<DecayCurve> {
    env.validate()?;
    if times.is_empty() {
        return Err(Error::invalid("time grid is empty"));
    }
    if times[0] < 0.0 || !times.iter().all(|t| t.is_finite()) {
        return Err(Error::invalid("times must be finite and >= 0"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("times must be strictly increasing"));
    }
    if n_realizations < MIN_REALIZATIONS {
        return Err(Error::invalid(format!("need at least {MIN_REALIZATIONS} realizations, got {n_realizations}")));
    }
    let t_max = *times.last().expect("non-empty");
    let n_points = times.len();
    let quiet = env.magnetic.is_silent() && env.electric.is_silent();
    if t_max == 0.0 || quiet {
        let p0 = match kind {
            SequenceKind::Ramsey => 0.0,
            SequenceKind::HahnEcho => 1.0,
        };
        return Ok(DecayCurve {
            sequence_kind: kind,
            times: times.to_vec(),
            population: vec![p0; n_points],
            mc_std_error: vec![0.0; n_points],
            n_realizations,
            seed,
        });
    }

    let limit = step_rule(env, t_max)?;
    let dt_req = match opts.dt {
        Some(dt) if !(dt.is_finite() && dt > 0.0) => {
            return Err(Error::invalid(format!("time step must be > 0, got {dt}")));
        }
        // tolerate rounding when the caller passes the rule value back in
        Some(dt) if dt > limit * (1.0 + 1e-12) => return Err(Error::StepRule { dt, suggested: limit }),
        Some(dt) => dt,
        None => limit,
    };
    let n_steps = (t_max / dt_req).ceil().max(1.0) as usize;
    let dt = t_max / n_steps as f64;

    let sim = Simulator::new(kind, times, env, dt, n_steps, opts.mode)?;
    let n_chunks = n_realizations.div_ceil(CHUNK);
    let run_chunk = |c: usize| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n_realizations);
        sim.chunk(seed, lo..hi)
    };
    let partials: Vec<Moments> = if opts.parallel {
        (0..n_chunks).into_par_iter().map(run_chunk).collect()
    } else {
        (0..n_chunks).map(run_chunk).collect()
    };

    let mut total = Moments::new(n_points);
    for part in &partials {
        total.merge(part);
    }
    let n = n_realizations as f64;
    let mut population = Vec::with_capacity(n_points);
    let mut mc_std_error = Vec::with_capacity(n_points);
    for k in 0..n_points {
        let mean = total.sum[k] / n;
        let var = ((total.sum_sq[k] - n * mean * mean) / (n - 1.0)).max(0.0);
        population.push(match kind {
            SequenceKind::Ramsey => 0.5 - 0.5 * mean,
            SequenceKind::HahnEcho => 0.5 + 0.5 * mean,
        });
        mc_std_error.push(var.sqrt() / (2.0 * n.sqrt()));
    }
    Ok(DecayCurve { sequence_kind: kind, times: times.to_vec(), population, mc_std_error, n_realizations, seed })
}

struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn new(n: usize) -> Self {
        Self { sum: vec![0.0; n], sum_sq: vec![0.0; n] }
    }

    fn merge(&mut self, other: &Moments) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
    }
}

struct Simulator<'a> {
    kind: SequenceKind,
    times: &'a [f64],
    env: &'a NoiseEnvironment,
    dt: f64,
    n_steps: usize,
    mode: DeltaOmegaMode,
    /// linear coefficients (rad/s per T, rad/s per V/m)
    coef_b: f64,
    coef_e: f64,
}

impl<'a> Simulator<'a> {
    fn new(
        kind: SequenceKind,
        times: &'a [f64],
        env: &'a NoiseEnvironment,
        dt: f64,
        n_steps: usize,
        mode: DeltaOmegaMode,
    ) -> Result<Self> {
        let r = sensitivity_factors(env)?;
        let tau = std::f64::consts::TAU;
        Ok(Self {
            kind,
            times,
            env,
            dt,
            n_steps,
            mode,
            coef_b: r.r_b * tau * env.params.zeeman_hz_per_tesla(),
            coef_e: r.r_e * tau * env.params.d_perp_hz_per_v_per_m,
        })
    }

    fn chunk(&self, seed: u64, range: std::ops::Range<usize>) -> Moments {
        let n_samples = self.n_steps + 1;
        let mut b = vec![0.0; n_samples];
        let mut e = vec![0.0; n_samples];
        let mut acc = Moments::new(self.times.len());
        for r in range {
            // two streams per realization: 2r magnetic, 2r+1 electric
            let r = r as u64;
            fill_ou_path(&self.env.magnetic, self.dt, &mut stream_rng(seed, 2 * r), &mut b);
            fill_ou_path(&self.env.electric, self.dt, &mut stream_rng(seed, 2 * r + 1), &mut e);
            let omega: Vec<f64> = match self.mode {
                DeltaOmegaMode::Linearized => {
                    b.iter().zip(&e).map(|(&bb, &ee)| self.coef_b * bb + self.coef_e * ee).collect()
                }
                DeltaOmegaMode::Exact => b
                    .iter()
                    .zip(&e)
                    .map(|(&bb, &ee)| delta_omega(bb, ee, self.env, DeltaOmegaMode::Exact).unwrap_or(0.0))
                    .collect(),
            };
            let phases = sequence_phases(self.kind, self.times, &omega, self.dt);
            for (k, phase) in phases.into_iter().enumerate() {
                let c = phase.cos();
                acc.sum[k] += c;
                acc.sum_sq[k] += c * c;
            }
        }
        acc
    }
}

/// Accumulated phase at each of `times` for δω sampled on a uniform grid of
/// step `dt` starting at 0. The integral is the trapezoid rule on the
/// piecewise-linear interpolant; for the echo, the π pulse at half of each
/// total time flips the sign of the second half.
pub fn sequence_phases(kind: SequenceKind, times: &[f64], omega: &[f64], dt: f64) -> Vec<f64> {
    let n = omega.len();
    let mut cumulative = vec![0.0; n];
    for k in 1..n {
        cumulative[k] = cumulative[k - 1] + 0.5 * dt * (omega[k - 1] + omega[k]);
    }
    let integral_to = |t: f64| {
        let pos = t / dt;
        let k = (pos.floor() as usize).min(n - 1);
        let frac = pos - k as f64;
        if k == n - 1 || frac <= 0.0 {
            return cumulative[k];
        }
        let w_t = omega[k] + (omega[k + 1] - omega[k]) * frac;
        cumulative[k] + 0.5 * frac * dt * (omega[k] + w_t)
    };
    times
        .iter()
        .map(|&t| match kind {
            SequenceKind::Ramsey => integral_to(t),
            SequenceKind::HahnEcho => 2.0 * integral_to(t / 2.0) - integral_to(t),
        })
        .collect()
}
