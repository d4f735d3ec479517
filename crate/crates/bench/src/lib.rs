//! Fixtures shared by the benchmarks.

use nvcoh::coherence::t2_fid_magnetic;
use nvcoh::fitting::Spectrum;
use nvcoh::hamiltonian::resonance_frequencies;
use nvcoh::units::{khz_cm_per_kv, kv_per_cm, micro_tesla};
use nvcoh::{FieldVector, NoiseEnvironment, NvParameters, OuParams};

pub fn nv1_params() -> NvParameters {
    NvParameters::default().with_d_perp(khz_cm_per_kv(19.0))
}

pub fn nv1_environment(e_kv_cm: f64) -> NoiseEnvironment {
    NoiseEnvironment::magnetic_only(
        nv1_params(),
        micro_tesla(13.0),
        kv_per_cm(e_kv_cm),
        OuParams::new(micro_tesla(6.0), 0.170).unwrap(),
    )
}

/// Twenty Ramsey delays out to 3·T₂.
pub fn ramsey_grid(env: &NoiseEnvironment) -> Vec<f64> {
    let t2 = t2_fid_magnetic(env).unwrap();
    (1..=20).map(|k| 0.15 * t2 * k as f64).collect()
}

/// Noiseless six-dip spectrum at the given transverse field.
pub fn six_dip_spectrum(e_kv_cm: f64, points: usize) -> Spectrum {
    let res = resonance_frequencies(
        &nv1_params(),
        &FieldVector::new(kv_per_cm(e_kv_cm), 0.0, 0.0),
        &FieldVector::along_z(micro_tesla(13.0)),
    )
    .unwrap();
    let lines = res.frequencies();
    let lo = lines.iter().copied().fold(f64::INFINITY, f64::min) - 3e6;
    let hi = lines.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3e6;
    let freqs: Vec<f64> = (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect();
    let contrast = freqs
        .iter()
        .map(|&f| 1.0 - lines.iter().map(|c| 0.03 * (-(f - c).powi(2) / (2.0 * 150e3f64.powi(2))).exp()).sum::<f64>())
        .collect();
    Spectrum::new(freqs, contrast).unwrap()
}
