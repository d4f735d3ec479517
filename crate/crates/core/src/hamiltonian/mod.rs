//! Ground-state spin Hamiltonian of the NV center: construction,
//! diagonalization, state labeling and the observable ODMR lines.
//!
//! Matrices are in angular-frequency units (rad/s) on the product basis
//! |m_s⟩⊗|m_I⟩ with both quantum numbers ordered +1, 0, −1.

mod assign;
pub mod eigen;
pub mod spin;

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::FieldVector;
use crate::params::NvParameters;
use crate::{Error, Result};
pub use eigen::hermitian_eigen;
pub use spin::{CMatrix, SpinMatrices, SPIN1_M};

/// Minimum dominant-overlap weight for a state to be labeled.
pub const MIN_LABEL_OVERLAP: f64 = 0.4;

/// Quantum-number label of an eigenstate. `mi` is `None` for the electronic
/// (3-level) Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateLabel {
    pub ms: i8,
    pub mi: Option<i8>,
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mi {
            Some(mi) => write!(f, "|{:+},{:+}>", self.ms, mi),
            None => write!(f, "|{:+}>", self.ms),
        }
    }
}

/// Product-basis labels for a 3- or 9-dimensional Hamiltonian.
pub fn basis_labels(dim: usize) -> Vec<StateLabel> {
    match dim {
        3 => SPIN1_M.iter().map(|&ms| StateLabel { ms, mi: None }).collect(),
        9 => SPIN1_M
            .iter()
            .flat_map(|&ms| SPIN1_M.iter().map(move |&mi| StateLabel { ms, mi: Some(mi) }))
            .collect(),
        _ => Vec::new(),
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    matrix: CMatrix,
}

impl HamiltonianMatrix {
    /// Wraps an arbitrary 3×3 or 9×9 matrix (rad/s). Hermiticity is checked
    /// by [`eigensolve`], not here.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || !(n == 3 || n == 9) {
            return Err(Error::invalid(format!(
                "Hamiltonian must be 3x3 or 9x9, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn max_asymmetry(&self) -> f64 {
        spin::max_asymmetry(&self.matrix)
    }

    pub fn max_abs(&self) -> f64 {
        spin::max_abs(&self.matrix)
    }
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Electronic spin Hamiltonian: zero-field splitting with axial Stark shift,
/// transverse Stark coupling, and electron Zeeman term.
pub fn build_electronic_hamiltonian(p: &NvParameters, e: &FieldVector, b: &FieldVector) -> Result<HamiltonianMatrix> {
    p.validate()?;
    e.check_finite("electric")?;
    b.check_finite("magnetic")?;
    let s = SpinMatrices::new();
    let id = &s.identity3;
    let axial = TAU * (p.d_gs_hz + p.d_par_hz_per_v_per_m * e.z);
    let stark = TAU * p.d_perp_hz_per_v_per_m;
    let zeeman = TAU * p.zeeman_hz_per_tesla();

    let sz2 = &s.sz * &s.sz;
    let mut h = (&sz2 - id * re(2.0 / 3.0)) * re(axial);
    let sx2 = &s.sx * &s.sx;
    let sy2 = &s.sy * &s.sy;
    let sxsy = &s.sx * &s.sy + &s.sy * &s.sx;
    h += (&sy2 - &sx2) * re(stark * e.x);
    h += sxsy * re(stark * e.y);
    h += &s.sx * re(zeeman * b.x);
    h += &s.sy * re(zeeman * b.y);
    h += &s.sz * re(zeeman * b.z);
    HamiltonianMatrix::from_matrix(h)
}

/// Electronic Hamiltonian on the 9-level electron ⊗ ¹⁴N space, plus hyperfine
/// and quadrupole couplings.
pub fn build_full_hamiltonian(p: &NvParameters, e: &FieldVector, b: &FieldVector) -> Result<HamiltonianMatrix> {
    let he = build_electronic_hamiltonian(p, e, b)?;
    let s = SpinMatrices::new();
    let id = &s.identity3;
    let mut h = kron(he.matrix(), id);
    h += kron(&s.sz, &s.iz) * re(TAU * p.a_par_hz);
    h += (kron(&s.sx, &s.ix) + kron(&s.sy, &s.iy)) * re(TAU * p.a_perp_hz);
    h += kron(id, &(&s.iz * &s.iz)) * re(TAU * p.p_hz);
    HamiltonianMatrix::from_matrix(h)
}

#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Ascending eigenvalues, rad/s.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, product-basis coordinates.
    pub eigenvectors: CMatrix,
    /// Set by [`label_states`].
    pub labels: Option<Vec<StateLabel>>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues_hz(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|w| w / TAU).collect()
    }

    /// |⟨basis_b|state_s⟩|² as `overlap[s][b]`.
    pub fn overlaps(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|s| (0..n).map(|b| self.eigenvectors[(b, s)].norm_sqr()).collect())
            .collect()
    }

    /// Index of the state carrying `label`, if labeled.
    pub fn find(&self, label: StateLabel) -> Option<usize> {
        self.labels.as_ref()?.iter().position(|&l| l == label)
    }
}

/// Full Hermitian eigendecomposition of a Hamiltonian.
///
/// Exactly degenerate eigenvalue clusters are rotated so that their vectors
/// diagonalize the basis-index operator inside the cluster, which pins the
/// otherwise arbitrary gauge to the product basis wherever possible.
pub fn eigensolve(h: &HamiltonianMatrix) -> Result<EigenSystem> {
    let (values, mut vectors) = hermitian_eigen(h.matrix())?;
    let n = values.len();
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-12 * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            align_cluster(&mut vectors, start, end)?;
        }
        start = end;
    }
    Ok(EigenSystem { eigenvalues: values, eigenvectors: vectors, labels: None })
}

fn align_cluster(vectors: &mut CMatrix, start: usize, end: usize) -> Result<()> {
    let n = vectors.nrows();
    let k = end - start;
    let sub = vectors.columns(start, k).into_owned();
    let weights = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, (0..n).map(|i| re(i as f64))));
    let projected = sub.adjoint() * weights * &sub;
    let (_, rot) = hermitian_eigen(&projected)?;
    let aligned = sub * rot;
    vectors.columns_mut(start, k).copy_from(&aligned);
    Ok(())
}

/// Assigns each eigenstate the product-basis label of maximal overlap.
///
/// The assignment is a bijection: when the per-state maxima collide, the
/// labeling that maximizes the total overlap is used instead.
pub fn label_states(mut es: EigenSystem) -> Result<EigenSystem> {
    let n = es.dim();
    let basis = basis_labels(n);
    if basis.is_empty() {
        return Err(Error::invalid(format!("cannot label a {n}-level system")));
    }
    let overlaps = es.overlaps();
    let mut greedy = Vec::with_capacity(n);
    for (s, row) in overlaps.iter().enumerate() {
        let (best, &w) = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        if w < MIN_LABEL_OVERLAP {
            return Err(Error::StrongMixing { index: s, overlap: w });
        }
        greedy.push(best);
    }
    let mut seen = vec![false; n];
    let bijective = greedy.iter().all(|&b| !std::mem::replace(&mut seen[b], true));
    let assignment = if bijective {
        greedy
    } else {
        let cost: Vec<Vec<f64>> = overlaps.iter().map(|row| row.iter().map(|w| 1.0 - w).collect()).collect();
        assign::min_cost_assignment(&cost)
    };
    es.labels = Some(assignment.into_iter().map(|b| basis[b]).collect());
    Ok(es)
}

/// Builds, diagonalizes and labels the 9-level Hamiltonian.
pub fn diagonalize_full(p: &NvParameters, e: &FieldVector, b: &FieldVector) -> Result<EigenSystem> {
    label_states(eigensolve(&build_full_hamiltonian(p, e, b)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Lower-frequency line of an m_I pair.
    Minus,
    /// Higher-frequency line of an m_I pair.
    Plus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" | "+1" | "1" => Ok(Branch::Plus),
            "-" | "minus" | "-1" => Ok(Branch::Minus),
            other => Err(Error::invalid(format!("unknown branch '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub frequency_hz: f64,
    pub branch: Branch,
    pub mi: i8,
}

/// The six allowed m_s = 0 → ±1 lines, ordered by m_I (+1, 0, −1) and within
/// each m_I by branch (−, +).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    pub transitions: Vec<Transition>,
}

impl ResonanceSet {
    pub fn get(&self, branch: Branch, mi: i8) -> Option<f64> {
        self.transitions
            .iter()
            .find(|t| t.branch == branch && t.mi == mi)
            .map(|t| t.frequency_hz)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.transitions.iter().map(|t| t.frequency_hz).collect()
    }

    /// Line frequencies of one branch sorted ascending.
    pub fn branch_lines(&self, branch: Branch) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .transitions
            .iter()
            .filter(|t| t.branch == branch)
            .map(|t| t.frequency_hz)
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Largest spacing between adjacent hyperfine lines within one branch.
    pub fn max_adjacent_spacing(&self, branch: Branch) -> f64 {
        self.branch_lines(branch)
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// The six ODMR transition frequencies from the 9-level Hamiltonian.
pub fn resonance_frequencies(p: &NvParameters, e: &FieldVector, b: &FieldVector) -> Result<ResonanceSet> {
    let es = diagonalize_full(p, e, b)?;
    resonances_from(&es)
}

pub fn resonances_from(es: &EigenSystem) -> Result<ResonanceSet> {
    let labels = es
        .labels
        .as_ref()
        .ok_or_else(|| Error::invalid("eigensystem is not labeled"))?;
    let mut transitions = Vec::with_capacity(6);
    for mi in SPIN1_M {
        let ground = labels
            .iter()
            .position(|l| l.ms == 0 && l.mi == Some(mi))
            .ok_or_else(|| Error::MissingLine(format!("no m_s=0, m_I={mi:+} state")))?;
        let mut upper: Vec<f64> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.ms != 0 && l.mi == Some(mi))
            .map(|(i, _)| es.eigenvalues[i])
            .collect();
        if upper.len() != 2 {
            return Err(Error::MissingLine(format!("m_I={mi:+} has {} m_s=±1 states", upper.len())));
        }
        upper.sort_by(f64::total_cmp);
        let w0 = es.eigenvalues[ground];
        for (branch, w) in [(Branch::Minus, upper[0]), (Branch::Plus, upper[1])] {
            transitions.push(Transition { frequency_hz: (w - w0) / TAU, branch, mi });
        }
    }
    Ok(ResonanceSet { transitions })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelSplitting {
    pub f_plus: f64,
    pub f_minus: f64,
}

impl TwoLevelSplitting {
    pub fn splitting(&self) -> f64 {
        self.f_plus - self.f_minus
    }
}

/// Closed-form m_s = 0 → ±1 lines with the nuclear spin ignored:
/// D + d∥E_z ± sqrt((g μ_B B_z)² + (d⊥ E⊥)²), all over h.
pub fn effective_two_level_splitting(p: &NvParameters, e_perp: f64, b_z: f64) -> Result<TwoLevelSplitting> {
    effective_lines(p, e_perp, 0.0, b_z)
}

/// As [`effective_two_level_splitting`], including the axial field E_z.
pub fn effective_lines(p: &NvParameters, e_perp: f64, e_z: f64, b_z: f64) -> Result<TwoLevelSplitting> {
    if !(e_perp >= 0.0 && e_perp.is_finite()) {
        return Err(Error::invalid(format!("E_perp must be finite and >= 0, got {e_perp}")));
    }
    let center = p.d_gs_hz + p.d_par_hz_per_v_per_m * e_z;
    let half = (p.zeeman_hz_per_tesla() * b_z).hypot(p.d_perp_hz_per_v_per_m * e_perp);
    Ok(TwoLevelSplitting { f_plus: center + half, f_minus: center - half })
}

/// Electric mixing angle θ with tan θ = d⊥E⊥ / (g μ_B B_z), in [0, π].
pub fn mixing_angle(p: &NvParameters, e_perp: f64, b_z: f64) -> Result<f64> {
    if e_perp < 0.0 {
        return Err(Error::invalid("E_perp must be >= 0"));
    }
    if e_perp == 0.0 && b_z == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    Ok((p.d_perp_hz_per_v_per_m * e_perp).atan2(p.zeeman_hz_per_tesla() * b_z))
}

/// Dressed m_s = ±1 eigenstates in the (|+1⟩, |0⟩, |−1⟩) basis for mixing
/// angle θ and field azimuth φ_E.
pub fn dressed_state(theta: f64, phi_e: f64, branch: Branch) -> [Complex64; 3] {
    let (sh, ch) = (theta / 2.0).sin_cos();
    let plus_phase = Complex64::from_polar(1.0, phi_e / 2.0);
    let minus_phase = Complex64::from_polar(1.0, -phi_e / 2.0);
    let zero = Complex64::new(0.0, 0.0);
    match branch {
        Branch::Plus => [plus_phase * ch, zero, -minus_phase * sh],
        Branch::Minus => [plus_phase * sh, zero, minus_phase * ch],
    }
}

/// Relative magnetic-dipole transition rate |⟨S_±|S_x|0⟩|² for a microwave
/// field along x. The two branches sum to one.
pub fn transition_rate(theta: f64, phi_e: f64, branch: Branch) -> Result<f64> {
    if !(theta.is_finite() && (0.0..=PI).contains(&theta)) {
        return Err(Error::invalid(format!("mixing angle must lie in [0, pi], got {theta}")));
    }
    let s = SpinMatrices::new();
    let bra = dressed_state(theta, phi_e, branch);
    // S_x |0⟩ is the middle column of S_x.
    let amp: Complex64 = (0..3).map(|k| bra[k].conj() * s.sx[(k, 1)]).sum();
    Ok(amp.norm_sqr())
}
