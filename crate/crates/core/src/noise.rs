//! Stationary Ornstein-Uhlenbeck noise: exact sampling and autocorrelation.
//!
//! A path x(t) has zero mean and covariance σ²·exp(−|t|/τ_c). Samples on a
//! uniform grid follow the exact update
//!
//! ```text
//! x[k+1] = α·x[k] + σ·sqrt(1 − α²)·ξ[k],   α = exp(−dt/τ_c)
//! ```
//!
//! with x[0] drawn from the stationary N(0, σ²), so paths carry no transient
//! and no time-step bias.
//!
//! Random streams are counter-addressed: every `(seed, stream)` pair selects an
//! independent ChaCha8 stream, so realization r of a Monte Carlo run can be
//! generated without touching realizations 0..r.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    /// Standard deviation of the stationary distribution (field units).
    pub sigma: f64,
    /// Correlation time, s.
    pub tau_c: f64,
}

impl OuParams {
    pub fn new(sigma: f64, tau_c: f64) -> Result<Self> {
        let p = Self { sigma, tau_c };
        p.validate()?;
        Ok(p)
    }

    /// A channel with zero amplitude; `tau_c` is irrelevant but kept valid.
    pub const fn silent() -> Self {
        Self { sigma: 0.0, tau_c: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::invalid(format!("noise sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if !(self.tau_c.is_finite() && self.tau_c > 0.0) {
            return Err(Error::invalid(format!("correlation time must be finite and > 0, got {}", self.tau_c)));
        }
        Ok(())
    }

    pub fn is_silent(&self) -> bool {
        self.sigma == 0.0
    }

    /// One-step decay factor exp(−dt/τ_c).
    pub fn decay(&self, dt: f64) -> f64 {
        (-dt / self.tau_c).exp()
    }

    /// Covariance σ²·exp(−|t|/τ_c).
    pub fn covariance(&self, lag: f64) -> f64 {
        self.sigma * self.sigma * (-lag.abs() / self.tau_c).exp()
    }
}

/// Independent random stream `stream` of generator family `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Fills `out` with an exact stationary OU path on step `dt`.
pub fn fill_ou_path<R: rand::Rng + ?Sized>(p: &OuParams, dt: f64, rng: &mut R, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    if p.is_silent() {
        out.fill(0.0);
        return;
    }
    let alpha = p.decay(dt);
    let kick = p.sigma * (-(-2.0 * dt / p.tau_c).exp_m1()).sqrt();
    let x0: f64 = StandardNormal.sample(rng);
    let mut x = p.sigma * x0;
    out[0] = x;
    for slot in out.iter_mut().skip(1) {
        let xi: f64 = StandardNormal.sample(rng);
        x = alpha * x + kick * xi;
        *slot = x;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePath {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub seed: u64,
    pub params: OuParams,
}

impl NoisePath {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |k| k as f64 * self.dt)
    }
}

/// Samples `n` points of a stationary OU path with step `dt`. Deterministic in
/// `(p, dt, n, seed)`.
pub fn sample_ou_path(p: &OuParams, dt: f64, n: usize, seed: u64) -> Result<NoisePath> {
    p.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("time step must be > 0, got {dt}")));
    }
    if n == 0 {
        return Err(Error::invalid("path length must be >= 1"));
    }
    let mut samples = vec![0.0; n];
    fill_ou_path(p, dt, &mut stream_rng(seed, 0), &mut samples);
    Ok(NoisePath { dt, samples, seed, params: *p })
}

/// Sample autocovariance at lags 0..=max_lag, returned as (lag time, estimate).
///
/// Lag k averages over the n − k available products after removing the
/// sample mean; lag 0 is the sample variance.
pub fn autocorrelation(path: &NoisePath, max_lag: usize) -> Result<Vec<(f64, f64)>> {
    let n = path.samples.len();
    if n == 0 {
        return Err(Error::invalid("autocorrelation of an empty path"));
    }
    if max_lag >= n {
        return Err(Error::invalid(format!("max_lag {max_lag} must be < path length {n}")));
    }
    let mean = path.samples.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = path.samples.iter().map(|x| x - mean).collect();
    Ok((0..=max_lag)
        .map(|k| {
            let s: f64 = centered[..n - k].iter().zip(&centered[k..]).map(|(a, b)| a * b).sum();
            (k as f64 * path.dt, s / (n - k) as f64)
        })
        .collect())
}
