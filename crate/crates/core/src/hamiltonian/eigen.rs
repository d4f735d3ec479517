//! Dense Hermitian eigensolver (cyclic complex Jacobi).
//!
//! The matrices in this crate are at most 9×9, where Jacobi is both fast
//! enough and accurate to a few ulps of the spectral norm, including for
//! degenerate spectra. It also leaves already-decoupled basis states
//! untouched, which keeps eigenvectors aligned with the product basis at
//! exact degeneracies.

use num_complex::Complex64;

use super::spin::{max_abs, max_asymmetry, CMatrix};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 64;

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Full eigendecomposition of a Hermitian matrix. Eigenvalues ascend; the
/// columns of the returned matrix are the matching orthonormal eigenvectors.
///
/// The input must be Hermitian to 1e-9 relative to its largest element.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::invalid("eigensolver needs a square matrix"));
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let scale = max_abs(m);
    let asym = max_asymmetry(m);
    let tolerance = 1e-9 * scale;
    if asym > tolerance {
        return Err(Error::NotHermitian { asymmetry: asym, tolerance });
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }

    // Symmetrize so rounding in the input cannot bias the rotation angles.
    let mut a = CMatrix::from_fn(n, n, |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5);
    let mut v = CMatrix::identity(n, n);
    let target = f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off = off_diagonal_norm(&a);
        if off > 1e3 * target {
            return Err(Error::EigenNoConvergence { sweeps: MAX_SWEEPS, off_norm: off });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// One Jacobi rotation annihilating a[p][q]. The unitary is a phase on q
/// (making a[p][q] real) followed by the classic real rotation.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip rotations that cannot change the diagonal in floating point.
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / mag; // e^{iα}
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}
