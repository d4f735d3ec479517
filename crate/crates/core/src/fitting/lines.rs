//! Field and coupling extraction from resonance-line positions.

use serde::{Deserialize, Serialize};

use super::lm::{solve, Bounds, FitResult, LmOptions, Problem};
use crate::field::FieldVector;
use crate::hamiltonian::{resonance_frequencies, Branch, ResonanceSet};
use crate::params::NvParameters;
use crate::{Error, Result};

/// B_z from the m_I = 0 pair of a zero-field resonance set:
/// h(f₊ − f₋) / (2 g μ_B).
pub fn estimate_bz(res: &ResonanceSet, p: &NvParameters) -> Result<f64> {
    let plus = res.get(Branch::Plus, 0).ok_or_else(|| Error::MissingLine("m_I=0 upper line".into()))?;
    let minus = res.get(Branch::Minus, 0).ok_or_else(|| Error::MissingLine("m_I=0 lower line".into()))?;
    Ok((plus - minus) / (2.0 * p.zeeman_hz_per_tesla()))
}

/// One measured line position at a given transverse field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DperpPoint {
    pub e_perp: f64,
    pub branch: Branch,
    pub mi: i8,
    pub frequency_hz: f64,
}

/// Least-squares d⊥ (Hz per V/m) from line positions measured at several
/// transverse fields with B_z held fixed and B_x = B_y = 0.
pub fn fit_dperp(data: &[DperpPoint], b_z: f64, p: &NvParameters, sigma_hz: Option<&[f64]>) -> Result<FitResult> {
    let mut fields: Vec<f64> = data.iter().map(|d| d.e_perp).collect();
    fields.sort_by(f64::total_cmp);
    fields.dedup();
    if fields.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 distinct field points, got {}", fields.len())));
    }
    if data.iter().any(|d| !(d.e_perp.is_finite() && d.e_perp >= 0.0 && d.frequency_hz.is_finite())) {
        return Err(Error::invalid("field points must be finite with E_perp >= 0"));
    }
    if data.iter().any(|d| !(-1..=1).contains(&d.mi)) {
        return Err(Error::invalid("m_I must be -1, 0 or +1"));
    }
    let slot: Vec<usize> = data
        .iter()
        .map(|d| fields.iter().position(|&f| f == d.e_perp).expect("field present"))
        .collect();
    let bias = FieldVector::along_z(b_z);
    let model = |q: &[f64]| -> Result<Vec<f64>> {
        let trial = p.with_d_perp(q[0]);
        let sets = fields
            .iter()
            .map(|&e| resonance_frequencies(&trial, &FieldVector::new(e, 0.0, 0.0), &bias))
            .collect::<Result<Vec<_>>>()?;
        data.iter()
            .zip(&slot)
            .map(|(d, &k)| {
                sets[k]
                    .get(d.branch, d.mi)
                    .ok_or_else(|| Error::MissingLine(format!("{} m_I={}", d.branch, d.mi)))
            })
            .collect()
    };
    let y: Vec<f64> = data.iter().map(|d| d.frequency_hz).collect();
    let init = initial_dperp(data, b_z, p);
    let problem = Problem::new(model, &y, &["d_perp_hz_per_v_per_m"])
        .weighted(sigma_hz)
        .bounded(Bounds::non_negative(1));
    solve(&problem, &[init], &LmOptions::default())
}

/// Closed-form estimate from the m_I = 0 pair at the strongest field, falling
/// back to the configured coupling.
fn initial_dperp(data: &[DperpPoint], b_z: f64, p: &NvParameters) -> f64 {
    let e_max = data.iter().map(|d| d.e_perp).fold(0.0, f64::max);
    let line = |b: Branch| {
        data.iter()
            .find(|d| d.e_perp == e_max && d.mi == 0 && d.branch == b)
            .map(|d| d.frequency_hz)
    };
    if let (Some(up), Some(down)) = (line(Branch::Plus), line(Branch::Minus)) {
        let half = 0.5 * (up - down);
        let zeeman = p.zeeman_hz_per_tesla() * b_z;
        let stark2 = half * half - zeeman * zeeman;
        if stark2 > 0.0 && e_max > 0.0 {
            return stark2.sqrt() / e_max;
        }
    }
    p.d_perp_hz_per_v_per_m.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{khz_cm_per_kv, kv_per_cm, micro_tesla};

    #[test]
    fn bz_round_trip() {
        let p = NvParameters::default();
        for b in [13.0, 11.0] {
            let res = resonance_frequencies(&p, &FieldVector::ZERO, &FieldVector::along_z(micro_tesla(b))).unwrap();
            let est = estimate_bz(&res, &p).unwrap();
            assert!((est / micro_tesla(b) - 1.0).abs() < 1e-3, "{est}");
        }
        let res = resonance_frequencies(&p, &FieldVector::ZERO, &FieldVector::ZERO).unwrap();
        assert!(estimate_bz(&res, &p).unwrap().abs() < 1e-12);
        let empty = ResonanceSet { transitions: vec![] };
        assert!(estimate_bz(&empty, &p).is_err());
    }

    #[test]
    fn dperp_noiseless() {
        let truth = khz_cm_per_kv(17.0);
        let p = NvParameters::default().with_d_perp(truth);
        let b = micro_tesla(13.0);
        let mut data = Vec::new();
        for k in 1..=8 {
            let e = kv_per_cm(12.5 * k as f64);
            let res = resonance_frequencies(&p, &FieldVector::new(e, 0.0, 0.0), &FieldVector::along_z(b)).unwrap();
            for t in &res.transitions {
                data.push(DperpPoint { e_perp: e, branch: t.branch, mi: t.mi, frequency_hz: t.frequency_hz });
            }
        }
        let start = NvParameters::default().with_d_perp(khz_cm_per_kv(10.0));
        let fit = fit_dperp(&data, b, &start, None).unwrap();
        assert!(fit.converged);
        assert!((fit.params[0] / truth - 1.0).abs() < 1e-4);
    }

    #[test]
    fn dperp_needs_three_fields() {
        let p = NvParameters::default();
        let pts: Vec<DperpPoint> = [0.0, 1e6]
            .iter()
            .map(|&e| DperpPoint { e_perp: e, branch: Branch::Plus, mi: 0, frequency_hz: 2.87e9 })
            .collect();
        assert!(fit_dperp(&pts, 1e-5, &p, None).is_err());
    }
}
