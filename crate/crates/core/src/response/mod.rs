//! Kubo spin conductivity at finite temperature and frequency, its contour
//! limit, the finite-difference Středa derivative and the three-way check.

pub mod contour_sigma;
pub mod kubo;
pub mod streda;

pub use contour_sigma::{sigma_zero_limit, ZeroLimit, SIGMA_IMAG_TOL};
pub use kubo::{fermi_dirac, kubo_sigma, KuboEvaluator, KuboParams, KuboResult};
pub use streda::{
    contour_conductivity, equal_components, solve_at, solve_at_with, streda_derivative, streda_derivative_with,
    verify_spin_streda, verify_spin_streda_with, DirectSolve, FieldMap, FieldPoint, SpectrumSource, StredaDerivative,
    StredaOptions, StredaOutcome, StredaReport, DEFAULT_DELTA_B,
};
