//! Physical constants, CODATA 2018 (SI 2019 exact values where defined).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Planck constant h, J·s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, derived from [`PLANCK`] so that h = 2πħ holds to
/// rounding.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Free-electron g factor (magnitude).
pub const FREE_ELECTRON_G: f64 = 2.002_319_304_362_56;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub h: f64,
    pub mu_b: f64,
    pub g_e: f64,
    pub eps0: f64,
    pub elementary_charge: f64,
    pub boltzmann_k: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        h: PLANCK,
        mu_b: BOHR_MAGNETON,
        g_e: FREE_ELECTRON_G,
        eps0: VACUUM_PERMITTIVITY,
        elementary_charge: ELEMENTARY_CHARGE,
        boltzmann_k: BOLTZMANN,
    };

    /// Coulomb constant 1/(4πε₀), N·m²/C².
    pub fn coulomb(&self) -> f64 {
        1.0 / (4.0 * PI * self.eps0)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_positive_and_h_is_two_pi_hbar() {
        let c = PhysicalConstants::default();
        for v in [c.hbar, c.h, c.mu_b, c.g_e, c.eps0, c.elementary_charge, c.boltzmann_k] {
            assert!(v > 0.0);
        }
        assert!(((2.0 * PI * c.hbar - c.h) / c.h).abs() < 1e-12);
    }

    #[test]
    fn bohr_magneton_over_h() {
        // μ_B/h = 13.996 244 936 GHz/T (CODATA 2018)
        let ratio = BOHR_MAGNETON / PLANCK;
        assert!((ratio / 13.996_244_936e9 - 1.0).abs() < 1e-9);
    }
}
