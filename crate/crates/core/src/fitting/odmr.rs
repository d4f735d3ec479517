//! Multi-Gaussian dip model for ODMR spectra.

use serde::{Deserialize, Serialize};

use super::lm::{solve, Bounds, FitResult, LmOptions, Problem};
use crate::{Error, Result};

/// |A∥|/h of ¹⁴N, the zero-field spacing of adjacent hyperfine lines.
pub const NOMINAL_HYPERFINE_SPACING_HZ: f64 = 2.1e6;
const SMOOTHING_WINDOW: usize = 5;
const DETECTION_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    /// Normalized photoluminescence, 1 off resonance.
    pub contrast: Vec<f64>,
}

impl Spectrum {
    pub fn new(frequencies: Vec<f64>, contrast: Vec<f64>) -> Result<Self> {
        let s = Self { frequencies, contrast };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies.len() != self.contrast.len() {
            return Err(Error::invalid("spectrum columns differ in length"));
        }
        if self.frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("spectrum frequencies must be strictly increasing"));
        }
        if self.frequencies.iter().chain(&self.contrast).any(|v| !v.is_finite()) {
            return Err(Error::invalid("spectrum contains non-finite values"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianDip {
    pub center: f64,
    /// Standard deviation, Hz.
    pub width: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianDipModel {
    pub baseline: f64,
    pub dips: Vec<GaussianDip>,
}

impl GaussianDipModel {
    pub fn evaluate(&self, f: f64) -> f64 {
        self.baseline
            - self
                .dips
                .iter()
                .map(|d| d.depth * (-(f - d.center).powi(2) / (2.0 * d.width * d.width)).exp())
                .sum::<f64>()
    }

    fn from_params(p: &[f64]) -> Self {
        Self {
            baseline: p[0],
            dips: p[1..].chunks(3).map(|c| GaussianDip { center: c[0], width: c[1], depth: c[2] }).collect(),
        }
    }
}

fn eval_params(p: &[f64], f: f64) -> f64 {
    let mut v = p[0];
    for c in p[1..].chunks(3) {
        v -= c[2] * (-(f - c[0]).powi(2) / (2.0 * c[1] * c[1])).exp();
    }
    v
}

fn moving_average(y: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..y.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(y.len());
            y[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Point-to-point noise estimate from the MAD of first differences.
fn noise_std(y: &[f64]) -> f64 {
    let mut d: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let m = median(&mut d.clone());
    let mut dev: Vec<f64> = d.iter_mut().map(|v| (*v - m).abs()).collect();
    1.4826 * median(&mut dev) / std::f64::consts::SQRT_2
}

/// Indices of local minima of the smoothed spectrum lying below the detection
/// threshold, deepest first.
fn detect_minima(s: &Spectrum) -> (Vec<usize>, f64, f64) {
    let smooth = moving_average(&s.contrast, SMOOTHING_WINDOW);
    let baseline = median(&mut s.contrast.clone());
    let noise = noise_std(&s.contrast);
    let threshold = baseline - DETECTION_SIGMAS * noise;
    let n = smooth.len();
    let mut minima: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < n {
        // treat runs of equal values as one plateau
        let mut j = i;
        while j + 1 < n && smooth[j + 1] == smooth[i] {
            j += 1;
        }
        let left_ok = i == 0 || smooth[i - 1] > smooth[i];
        let right_ok = j + 1 == n || smooth[j + 1] > smooth[i];
        if left_ok && right_ok && smooth[i] < threshold && i > 0 && j + 1 < n {
            minima.push((i + j) / 2);
        }
        i = j + 1;
    }
    minima.sort_by(|&a, &b| smooth[a].total_cmp(&smooth[b]));
    // a noise wiggle inside a dip is not a dip of its own: keep a minimum only
    // if the signal rises by the prominence margin between it and every
    // deeper minimum already kept
    let margin = DETECTION_SIGMAS * noise;
    let mut kept: Vec<usize> = Vec::with_capacity(minima.len());
    for &m in &minima {
        let separate = kept.iter().all(|&k| {
            let (lo, hi) = if k < m { (k, m) } else { (m, k) };
            let ridge = smooth[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            ridge - smooth[m] >= margin
        });
        if separate {
            kept.push(m);
        }
    }
    (kept, baseline, threshold)
}

/// Fits baseline − Σ depth·exp(−(f − c)²/2w²) with `n_dips` dips.
///
/// Returned dips are sorted by center; the FitResult parameter order is
/// baseline followed by (center, width, depth) per dip in the same order.
pub fn fit_odmr_gaussians(s: &Spectrum, n_dips: usize) -> Result<(GaussianDipModel, FitResult)> {
    s.validate()?;
    if n_dips == 0 {
        return Err(Error::invalid("n_dips must be >= 1"));
    }
    if s.len() < 3 * n_dips + 1 + SMOOTHING_WINDOW {
        return Err(Error::invalid(format!("{} points are too few for {n_dips} dips", s.len())));
    }
    let (mut minima, baseline, _) = detect_minima(s);
    if minima.len() < n_dips {
        return Err(Error::TooFewMinima { found: minima.len(), needed: n_dips });
    }
    minima.truncate(n_dips);
    minima.sort_unstable();
    let f = &s.frequencies;
    let span = f[f.len() - 1] - f[0];
    let step = span / (f.len() - 1) as f64;
    let width0 = if n_dips > 1 {
        minima.windows(2).map(|w| f[w[1]] - f[w[0]]).fold(f64::INFINITY, f64::min) / 4.0
    } else {
        (NOMINAL_HYPERFINE_SPACING_HZ / 4.0).min(span / 4.0)
    };
    let smooth = moving_average(&s.contrast, SMOOTHING_WINDOW);

    let mut init = vec![baseline];
    let mut bounds = Bounds::unbounded(1 + 3 * n_dips);
    for (k, &i) in minima.iter().enumerate() {
        let depth = (baseline - smooth[i].min(s.contrast[i])).max(f64::EPSILON);
        init.extend([f[i], width0.max(step), depth]);
        let o = 1 + 3 * k;
        bounds.lower[o] = f[0];
        bounds.upper[o] = f[f.len() - 1];
        bounds.lower[o + 1] = step / 10.0;
        bounds.upper[o + 1] = span;
        bounds.lower[o + 2] = 0.0;
    }
    let model = |p: &[f64]| Ok(f.iter().map(|&x| eval_params(p, x)).collect());
    let mut names = vec!["baseline".to_string()];
    for k in 0..n_dips {
        names.extend([format!("center_{k}"), format!("width_{k}"), format!("depth_{k}")]);
    }
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let problem = Problem::new(model, &s.contrast, &name_refs).bounded(bounds);
    let mut fit = solve(&problem, &init, &LmOptions::default())?;

    // sort dips by center, carrying parameters and uncertainties along
    let mut order: Vec<usize> = (0..n_dips).collect();
    order.sort_by(|&a, &b| fit.params[1 + 3 * a].total_cmp(&fit.params[1 + 3 * b]));
    let mut params = vec![fit.params[0]];
    let mut sigmas = vec![fit.sigmas[0]];
    for &k in &order {
        params.extend_from_slice(&fit.params[1 + 3 * k..4 + 3 * k]);
        sigmas.extend_from_slice(&fit.sigmas[1 + 3 * k..4 + 3 * k]);
    }
    fit.params = params;
    fit.sigmas = sigmas;
    Ok((GaussianDipModel::from_params(&fit.params), fit))
}
