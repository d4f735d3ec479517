//! Field vectors in the NV coordinate frame (z along the N-V axis).

use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Cartesian field in the NV frame. Units are V/m for electric fields and T
/// for magnetic fields.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FieldVector {
    pub const ZERO: FieldVector = FieldVector { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn along_z(z: f64) -> Self {
        Self { x: 0.0, y: 0.0, z }
    }

    pub const fn along_y(y: f64) -> Self {
        Self { x: 0.0, y, z: 0.0 }
    }

    /// Transverse magnitude sqrt(x² + y²).
    pub fn perp(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn magnitude(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Transverse azimuth atan2(y, x) in (-π, π].
    pub fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub(crate) fn check_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("{what} field has non-finite components")))
        }
    }
}

impl Neg for FieldVector {
    type Output = FieldVector;
    fn neg(self) -> FieldVector {
        FieldVector::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for FieldVector {
    type Output = FieldVector;
    fn mul(self, k: f64) -> FieldVector {
        FieldVector::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Magnitude and orientation of a field: polar angle `theta` from the NV axis
/// and azimuth `phi` in the transverse plane, both in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalDirection {
    pub magnitude: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalDirection {
    pub fn new(magnitude: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(magnitude.is_finite() && magnitude >= 0.0) {
            return Err(Error::invalid(format!("field magnitude must be finite and >= 0, got {magnitude}")));
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::invalid(format!("polar angle must lie in [0, pi], got {theta}")));
        }
        if !phi.is_finite() {
            return Err(Error::invalid("azimuth must be finite"));
        }
        Ok(Self { magnitude, theta, phi })
    }

    pub fn from_degrees(magnitude: f64, theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(magnitude, theta_deg.to_radians(), phi_deg.to_radians())
    }

    pub fn to_cartesian(&self) -> FieldVector {
        spherical_to_cartesian(self)
    }
}

pub fn spherical_to_cartesian(dir: &SphericalDirection) -> FieldVector {
    let (st, ct) = dir.theta.sin_cos();
    let (sp, cp) = dir.phi.sin_cos();
    FieldVector::new(dir.magnitude * st * cp, dir.magnitude * st * sp, dir.magnitude * ct)
}
