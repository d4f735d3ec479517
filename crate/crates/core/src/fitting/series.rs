//! Noise-parameter fits to coherence times measured across transverse fields.
//!
//! Every model here is a closed-form T₂ law evaluated with the couplings in
//! `NvParameters` and the bias B_z; σ and τ_c are taken as field independent.

use std::f64::consts::{SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use super::lm::{solve, Bounds, FitResult, LmOptions, Problem};
use crate::params::NvParameters;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct T2Point {
    /// Transverse field, V/m.
    pub e_perp: f64,
    pub t2: f64,
    pub sigma_t2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct T2Series {
    pub points: Vec<T2Point>,
}

impl T2Series {
    pub fn new(points: Vec<T2Point>) -> Result<Self> {
        let s = Self { points };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for pt in &self.points {
            if !(pt.t2.is_finite() && pt.t2 > 0.0) {
                return Err(Error::invalid(format!("T2 must be finite and > 0, got {}", pt.t2)));
            }
            if !(pt.e_perp.is_finite() && pt.e_perp >= 0.0) {
                return Err(Error::invalid(format!("E_perp must be finite and >= 0, got {}", pt.e_perp)));
            }
            if pt.sigma_t2.is_some_and(|s| !(s.is_finite() && s > 0.0)) {
                return Err(Error::invalid("sigma_T2 must be finite and > 0"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn t2(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t2).collect()
    }

    /// Per-point σ when every point carries one; mixed input is rejected.
    fn sigmas(&self) -> Result<Option<Vec<f64>>> {
        let given = self.points.iter().filter(|p| p.sigma_t2.is_some()).count();
        match given {
            0 => Ok(None),
            n if n == self.points.len() => Ok(Some(self.points.iter().map(|p| p.sigma_t2.unwrap()).collect())),
            _ => Err(Error::invalid("sigma_T2 must be given for all points or none")),
        }
    }

    fn require(&self, n: usize) -> Result<()> {
        self.validate()?;
        if self.points.len() < n {
            return Err(Error::invalid(format!("need at least {n} field points, got {}", self.points.len())));
        }
        Ok(())
    }
}

/// Sensitivity factors (R_b, R_e) at field `e`.
fn factors(p: &NvParameters, b_z: f64, e: f64) -> Result<(f64, f64)> {
    let zb = p.zeeman_hz_per_tesla() * b_z;
    let ze = p.d_perp_hz_per_v_per_m * e;
    let d = zb.hypot(ze);
    if d == 0.0 {
        return Err(Error::ZeroBias);
    }
    Ok((zb.abs() / d, ze.abs() / d))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Fits b_z^σ (T) to FID times: T₂ = √2 / (R_b · 2π g μ_B/h · b_z^σ).
pub fn fit_bsigma(series: &T2Series, b_z: f64, p: &NvParameters) -> Result<FitResult> {
    series.require(3)?;
    let gamma = TAU * p.zeeman_hz_per_tesla();
    let rb: Vec<f64> = series
        .points
        .iter()
        .map(|pt| factors(p, b_z, pt.e_perp).map(|f| f.0))
        .collect::<Result<_>>()?;
    if rb.contains(&0.0) {
        return Err(Error::Degenerate("magnetic sensitivity vanishes at B_z = 0".into()));
    }
    let init = median(series.points.iter().zip(&rb).map(|(pt, r)| SQRT_2 / (r * gamma * pt.t2)).collect());
    let model = |q: &[f64]| Ok(rb.iter().map(|r| SQRT_2 / (r * gamma * q[0])).collect());
    let y = series.t2();
    let sig = series.sigmas()?;
    let mut bounds = Bounds::non_negative(1);
    bounds.lower[0] = init * 1e-6;
    let problem = Problem::new(model, &y, &["b_sigma_t"]).weighted(sig.as_deref()).bounded(bounds);
    solve(&problem, &[init], &LmOptions::default())
}

/// Fits τ_c^b (s) to echo times with b_z^σ fixed:
/// T₂ = (12 τ_c / (R_b · 2π g μ_B/h · b_z^σ)²)^{1/3}.
pub fn fit_tauc_magnetic(series: &T2Series, b_sigma: f64, b_z: f64, p: &NvParameters) -> Result<FitResult> {
    series.require(3)?;
    if !(b_sigma.is_finite() && b_sigma > 0.0) {
        return Err(Error::invalid("b_sigma must be > 0"));
    }
    let w = TAU * p.zeeman_hz_per_tesla() * b_sigma;
    let rate2: Vec<f64> = series
        .points
        .iter()
        .map(|pt| factors(p, b_z, pt.e_perp).map(|f| (f.0 * w).powi(2)))
        .collect::<Result<_>>()?;
    let init = median(series.points.iter().zip(&rate2).map(|(pt, r2)| pt.t2.powi(3) * r2 / 12.0).collect());
    let model = |q: &[f64]| Ok(rate2.iter().map(|r2| (12.0 * q[0] / r2).cbrt()).collect());
    let y = series.t2();
    let sig = series.sigmas()?;
    let mut bounds = Bounds::non_negative(1);
    bounds.lower[0] = init * 1e-9;
    let problem = Problem::new(model, &y, &["tau_c_b_s"]).weighted(sig.as_deref()).bounded(bounds);
    solve(&problem, &[init], &LmOptions::default())
}

/// Two-channel echo fit.
///
/// The electric channel enters only through κ = (e_y^σ)²/τ_c^e, so the
/// identifiable combination is reported both as κ and as its inverse, the
/// ratio τ_c^e/(e_y^σ)². With no electric dephasing κ → 0 and the ratio
/// diverges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedEchoFit {
    pub tau_c_b: f64,
    pub sigma_tau_c_b: f64,
    /// (e_y^σ)²/τ_c^e, (V/m)²/s.
    pub kappa: f64,
    pub sigma_kappa: f64,
    /// τ_c^e/(e_y^σ)², s/(V/m)²; infinite when κ = 0.
    pub ratio: f64,
    pub sigma_ratio: f64,
    /// κ exceeds twice its uncertainty, i.e. the series resolves a plateau.
    pub plateau_resolved: bool,
    /// Parameters are (tau_c_b_s, kappa).
    pub fit: FitResult,
}

/// Fits 1/T₂³ = (R_b ω_b^σ)²/(12 τ_c^b) + (R_e · 2π d⊥/h)² κ / 12 with b_z^σ fixed.
pub fn fit_combined_echo(series: &T2Series, b_sigma: f64, b_z: f64, p: &NvParameters) -> Result<CombinedEchoFit> {
    series.require(4)?;
    if !(b_sigma.is_finite() && b_sigma > 0.0) {
        return Err(Error::invalid("b_sigma must be > 0"));
    }
    let wb = TAU * p.zeeman_hz_per_tesla() * b_sigma;
    let de = TAU * p.d_perp_hz_per_v_per_m;
    let mut xb = Vec::with_capacity(series.len());
    let mut xe = Vec::with_capacity(series.len());
    for pt in &series.points {
        let (rb, re) = factors(p, b_z, pt.e_perp)?;
        xb.push((rb * wb).powi(2) / 12.0);
        xe.push((re * de).powi(2) / 12.0);
    }
    let y = series.t2();
    let (u0, k0) = linear_start(&xb, &xe, &y);
    let model = |q: &[f64]| {
        Ok(xb.iter().zip(&xe).map(|(b, e)| (b / q[0] + q[1] * e).powf(-1.0 / 3.0)).collect())
    };
    let sig = series.sigmas()?;
    let mut bounds = Bounds::non_negative(2);
    bounds.lower[0] = 1e-9 / u0;
    let problem = Problem::new(model, &y, &["tau_c_b_s", "kappa_v2_per_m2_s"]).weighted(sig.as_deref()).bounded(bounds);
    let fit = solve(&problem, &[1.0 / u0, k0], &LmOptions::default())?;
    let (tau_c_b, kappa) = (fit.params[0], fit.params[1]);
    let (sigma_tau_c_b, sigma_kappa) = (fit.sigmas[0], fit.sigmas[1]);
    let (ratio, sigma_ratio) = if kappa > 0.0 {
        (1.0 / kappa, sigma_kappa / (kappa * kappa))
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(CombinedEchoFit {
        tau_c_b,
        sigma_tau_c_b,
        kappa,
        sigma_kappa,
        ratio,
        sigma_ratio,
        plateau_resolved: kappa > 2.0 * sigma_kappa,
        fit,
    })
}

/// Relative-error linear least squares for (1/τ_c^b, κ) from 1/T³, with κ
/// kept positive so the iterative fit starts inside its domain.
fn linear_start(xb: &[f64], xe: &[f64], t: &[f64]) -> (f64, f64) {
    // minimize Σ (T³·(u·xb + κ·xe) − 1)²
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((b, e), t) in xb.iter().zip(xe).zip(t) {
        let (cb, ce) = (b * t.powi(3), e * t.powi(3));
        a11 += cb * cb;
        a12 += cb * ce;
        a22 += ce * ce;
        b1 += cb;
        b2 += ce;
    }
    let det = a11 * a22 - a12 * a12;
    let (mut u, mut k) = if det > 1e-12 * a11 * a22 {
        ((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det)
    } else {
        (b1 / a11, 0.0)
    };
    if u <= 0.0 {
        u = b1 / a11;
    }
    let xb_max = xb.iter().cloned().fold(0.0, f64::max);
    let xe_max = xe.iter().cloned().fold(0.0, f64::max);
    if k <= 0.0 {
        k = if xe_max > 0.0 { 0.01 * u * xb_max / xe_max } else { 0.0 };
    }
    (u, k)
}
