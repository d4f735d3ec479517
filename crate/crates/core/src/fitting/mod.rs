//! Inverse problems: ODMR line fitting, B_z and d⊥ extraction, decay-curve
//! fits and noise parameters from T₂-versus-field series.

mod bounds;
mod decay;
mod lines;
pub mod lm;
mod odmr;
mod series;

pub use bounds::{bound_esigma, bound_tauce};
pub use decay::{fit_decay_free_exponent, fit_echo_decay, fit_fid_decay, DecayFit};
pub use lines::{estimate_bz, fit_dperp, DperpPoint};
pub use lm::{nonlinear_least_squares, Bounds, FitResult, LmOptions, Problem};
pub use odmr::{fit_odmr_gaussians, GaussianDip, GaussianDipModel, Spectrum, NOMINAL_HYPERFINE_SPACING_HZ};
pub use series::{
    fit_bsigma, fit_combined_echo, fit_tauc_magnetic, CombinedEchoFit, T2Point, T2Series,
};
