use serde::{Deserialize, Serialize};

use crate::constants::{BOHR_MAGNETON, PLANCK};
use crate::units::khz_cm_per_kv;
use crate::{Error, Result};

/// Ground-state spin-Hamiltonian couplings of a ¹⁴NV⁻ center, stored as
/// frequencies (coupling / h). Stark coefficients are in Hz per (V/m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NvParameters {
    /// Zero-field splitting D_gs/h, Hz.
    pub d_gs_hz: f64,
    /// Axial Stark coefficient d∥/h, Hz/(V/m).
    pub d_par_hz_per_v_per_m: f64,
    /// Transverse Stark coefficient d⊥/h, Hz/(V/m).
    pub d_perp_hz_per_v_per_m: f64,
    /// Axial hyperfine A∥/h, Hz.
    pub a_par_hz: f64,
    /// Transverse hyperfine A⊥/h, Hz.
    pub a_perp_hz: f64,
    /// ¹⁴N quadrupole P/h, Hz.
    pub p_hz: f64,
    pub g_e: f64,
}

impl Default for NvParameters {
    fn default() -> Self {
        Self {
            d_gs_hz: 2.87e9,
            d_par_hz_per_v_per_m: khz_cm_per_kv(0.35),
            d_perp_hz_per_v_per_m: khz_cm_per_kv(17.0),
            a_par_hz: -2.1e6,
            a_perp_hz: -2.7e6,
            p_hz: -5.0e6,
            g_e: 2.0028,
        }
    }
}

impl NvParameters {
    pub fn with_d_perp(mut self, d_perp_hz_per_v_per_m: f64) -> Self {
        self.d_perp_hz_per_v_per_m = d_perp_hz_per_v_per_m;
        self
    }

    /// Same electronic couplings, nuclear spin switched off.
    pub fn without_nuclear(mut self) -> Self {
        self.a_par_hz = 0.0;
        self.a_perp_hz = 0.0;
        self.p_hz = 0.0;
        self
    }

    /// Electron Zeeman coefficient g_e μ_B / h, Hz/T.
    pub fn zeeman_hz_per_tesla(&self) -> f64 {
        self.g_e * BOHR_MAGNETON / PLANCK
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.d_gs_hz,
            self.d_par_hz_per_v_per_m,
            self.d_perp_hz_per_v_per_m,
            self.a_par_hz,
            self.a_perp_hz,
            self.p_hz,
            self.g_e,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("NV parameters must be finite"));
        }
        if self.d_gs_hz <= 0.0 {
            return Err(Error::invalid("D_gs must be positive"));
        }
        if self.d_perp_hz_per_v_per_m <= 0.0 {
            return Err(Error::invalid("d_perp must be positive"));
        }
        Ok(())
    }
}
