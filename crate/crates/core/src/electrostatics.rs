//! Closed-form field estimates: the uniform field between two contacts and the
//! field of a surface point charge at a diamond / immersion-medium boundary.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::field::FieldVector;
use crate::{Error, Result};

pub const DIAMOND_PERMITTIVITY: f64 = 5.7;
pub const IMMERSION_OIL_PERMITTIVITY: f64 = 2.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeGeometry {
    pub applied_voltage: f64,
    /// Contact separation, m.
    pub gap: f64,
    pub dielectric_kd: f64,
    pub dielectric_kout: f64,
    /// NV depth below the surface, m.
    pub nv_depth: f64,
}

impl ElectrodeGeometry {
    pub fn new(applied_voltage: f64, gap: f64) -> Result<Self> {
        let g = Self {
            applied_voltage,
            gap,
            dielectric_kd: DIAMOND_PERMITTIVITY,
            dielectric_kout: IMMERSION_OIL_PERMITTIVITY,
            nv_depth: 10e-9,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.applied_voltage.is_finite() {
            return Err(Error::invalid("applied voltage must be finite"));
        }
        if !(self.gap.is_finite() && self.gap > 0.0) {
            return Err(Error::invalid(format!("electrode gap must be > 0, got {}", self.gap)));
        }
        if !(self.nv_depth.is_finite() && self.nv_depth > 0.0) {
            return Err(Error::invalid(format!("NV depth must be > 0, got {}", self.nv_depth)));
        }
        check_permittivities(self.dielectric_kd, self.dielectric_kout)
    }
}

fn check_permittivities(kd: f64, kout: f64) -> Result<()> {
    if !(kd.is_finite() && kd >= 1.0 && kout.is_finite() && kout >= 1.0) {
        return Err(Error::invalid(format!("dielectric constants must be >= 1, got {kd} and {kout}")));
    }
    Ok(())
}

/// Uniform-field approximation V / gap, V/m.
pub fn uniform_field_from_voltage(g: &ElectrodeGeometry) -> Result<f64> {
    g.validate()?;
    Ok(g.applied_voltage / g.gap)
}

/// Field magnitude of a charge `q` (C) sitting on the boundary between two
/// dielectrics, at distance `r` (m): q / (4πε₀ r²) · 2/(κ_d + κ_out).
/// No screening by mobile charge is included.
pub fn point_charge_field(q: f64, r: f64, kd: f64, kout: f64) -> Result<f64> {
    point_charge_field_with(&PhysicalConstants::CODATA_2018, q, r, kd, kout)
}

pub fn point_charge_field_with(c: &PhysicalConstants, q: f64, r: f64, kd: f64, kout: f64) -> Result<f64> {
    if !q.is_finite() {
        return Err(Error::invalid("charge must be finite"));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid(format!("distance must be > 0, got {r}")));
    }
    check_permittivities(kd, kout)?;
    Ok(c.coulomb() * (2.0 / (kd + kout)) * q / (r * r))
}

/// Field vector at `nv` from a charge at `charge`, both positions in m. The
/// direction is charge → NV for positive q.
pub fn point_charge_field_vector(q: f64, charge: FieldVector, nv: FieldVector, kd: f64, kout: f64) -> Result<FieldVector> {
    let d = FieldVector::new(nv.x - charge.x, nv.y - charge.y, nv.z - charge.z);
    let r = d.magnitude();
    let mag = point_charge_field(q, r, kd, kout)?;
    Ok(d * (mag / r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ELEMENTARY_CHARGE;

    #[test]
    fn contacts_120v_over_10um() {
        let g = ElectrodeGeometry::new(120.0, 10e-6).unwrap();
        assert!((uniform_field_from_voltage(&g).unwrap() / 1.2e7 - 1.0).abs() < 1e-15);
        let g = ElectrodeGeometry::new(0.0, 10e-6).unwrap();
        assert_eq!(uniform_field_from_voltage(&g).unwrap(), 0.0);
        let wide = ElectrodeGeometry::new(120.0, 20e-6).unwrap();
        assert!((uniform_field_from_voltage(&wide).unwrap() / 0.6e7 - 1.0).abs() < 1e-15);
        assert!(ElectrodeGeometry::new(1.0, 0.0).is_err());
    }

    #[test]
    fn single_surface_charge() {
        let e = point_charge_field(ELEMENTARY_CHARGE, 40e-9, 5.7, 2.3).unwrap();
        assert!((e / 1e5 - 2.24994).abs() < 1e-4, "{e}");
        assert_eq!(point_charge_field(0.0, 40e-9, 5.7, 2.3).unwrap(), 0.0);
        assert!(point_charge_field(ELEMENTARY_CHARGE, 0.0, 5.7, 2.3).is_err());
        assert!(point_charge_field(ELEMENTARY_CHARGE, 1e-9, 0.5, 2.3).is_err());
    }

    #[test]
    fn inverse_square_over_six_decades() {
        let q = ELEMENTARY_CHARGE;
        let base = point_charge_field(q, 1e-9, 5.7, 2.3).unwrap();
        for k in 1..=6 {
            let r = 1e-9 * 10f64.powi(k);
            let e = point_charge_field(q, r, 5.7, 2.3).unwrap();
            assert!(((e * (r / 1e-9).powi(2)) / base - 1.0).abs() < 1e-13);
        }
        let e1 = point_charge_field(q, 3e-8, 5.7, 2.3).unwrap();
        let e2 = point_charge_field(q, 6e-8, 5.7, 2.3).unwrap();
        assert!((e1 / e2 - 4.0).abs() < 1e-13);
    }

    #[test]
    fn vacuum_limit_is_coulomb() {
        let c = PhysicalConstants::default();
        let q = 3.0 * ELEMENTARY_CHARGE;
        let r = 7e-8;
        let e = point_charge_field(q, r, 1.0, 1.0).unwrap();
        assert!((e / (c.coulomb() * q / (r * r)) - 1.0).abs() < 1e-14);
        let mut halved = c;
        halved.eps0 *= 2.0;
        let e2 = point_charge_field_with(&halved, q, r, 1.0, 1.0).unwrap();
        assert!((e2 / e - 0.5).abs() < 1e-14);
    }

    #[test]
    fn vector_points_away_from_positive_charge() {
        let q = ELEMENTARY_CHARGE;
        let nv = FieldVector::new(0.0, 0.0, -10e-9);
        let charge = FieldVector::new(30e-9, 0.0, 0.0);
        let v = point_charge_field_vector(q, charge, nv, 5.7, 2.3).unwrap();
        let r = (30e-9f64).hypot(10e-9);
        let mag = point_charge_field(q, r, 5.7, 2.3).unwrap();
        assert!((v.magnitude() / mag - 1.0).abs() < 1e-14);
        assert!(v.x < 0.0 && v.z < 0.0);
        assert!(point_charge_field_vector(q, nv, nv, 5.7, 2.3).is_err());
    }
}
