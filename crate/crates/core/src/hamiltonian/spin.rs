use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Magnetic quantum numbers in basis order. Every spin-1 operator here uses
/// the ordering |+1⟩, |0⟩, |−1⟩.
pub const SPIN1_M: [i8; 3] = [1, 0, -1];

/// Spin-1 operators (ħ = 1) for the electron (S) and the ¹⁴N nucleus (I).
/// Both are spin 1, so the component matrices are identical; they are kept
/// separate to make Hamiltonian assembly read like the operator algebra.
#[derive(Debug, Clone)]
pub struct SpinMatrices {
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    pub ix: CMatrix,
    pub iy: CMatrix,
    pub iz: CMatrix,
    pub identity3: CMatrix,
}

impl SpinMatrices {
    pub fn new() -> Self {
        let r = |v: f64| Complex64::new(v, 0.0);
        let i = |v: f64| Complex64::new(0.0, v);
        let a = FRAC_1_SQRT_2;
        #[rustfmt::skip]
        let sx = CMatrix::from_row_slice(3, 3, &[
            ZERO, r(a), ZERO,
            r(a), ZERO, r(a),
            ZERO, r(a), ZERO,
        ]);
        #[rustfmt::skip]
        let sy = CMatrix::from_row_slice(3, 3, &[
            ZERO, i(-a), ZERO,
            i(a), ZERO,  i(-a),
            ZERO, i(a),  ZERO,
        ]);
        let sz = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![r(1.0), ZERO, r(-1.0)]));
        Self {
            ix: sx.clone(),
            iy: sy.clone(),
            iz: sz.clone(),
            sx,
            sy,
            sz,
            identity3: CMatrix::identity(3, 3),
        }
    }
}

impl Default for SpinMatrices {
    fn default() -> Self {
        Self::new()
    }
}

/// Largest element of |A − A†|.
pub fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}
