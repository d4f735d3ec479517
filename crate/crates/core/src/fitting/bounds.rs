//! Upper limits on the electric noise from the absence of electric dephasing
//! in the FID data.

use crate::coherence::{sensitivity_factors, NoiseEnvironment};
use crate::{Error, Result};

/// Largest e_y^σ (V/m) whose FID contribution stays a tenth of the magnetic
/// one at the strongest applied field:
/// (R_e d⊥ e_y^σ)² ≤ (R_b g μ_B b_z^σ)² / 10.
///
/// `env` supplies B_z, the field E_max and the couplings; its noise channels
/// are ignored. Returns infinity when the field has no transverse lever arm.
pub fn bound_esigma(b_sigma: f64, env: &NoiseEnvironment) -> Result<f64> {
    if !(b_sigma.is_finite() && b_sigma >= 0.0) {
        return Err(Error::invalid("b_sigma must be finite and >= 0"));
    }
    if !(env.e_perp.is_finite() && env.e_perp > 0.0) {
        return Err(Error::invalid("E_max must be > 0"));
    }
    let r = sensitivity_factors(env)?;
    if r.r_e == 0.0 {
        return Ok(f64::INFINITY);
    }
    let ratio = env.params.zeeman_hz_per_tesla() * b_sigma / env.params.d_perp_hz_per_v_per_m;
    Ok((r.r_b / r.r_e).abs() * ratio / 10f64.sqrt())
}

/// τ_c^e upper limit ratio · (e_y^σ)_max², s.
pub fn bound_tauce(ratio: f64, e_sigma_max: f64) -> Result<f64> {
    if !(ratio.is_finite() && ratio >= 0.0 && e_sigma_max.is_finite() && e_sigma_max >= 0.0) {
        return Err(Error::invalid("ratio and e_sigma_max must be finite and >= 0"));
    }
    Ok(ratio * e_sigma_max * e_sigma_max)
}
