//! Eigensolving, gap detection, contours, Riesz projections, resolvents and
//! the off-diagonal Liouvillian inverse.

pub mod contour;
pub mod eigen;
pub mod gap;
pub mod liouvillian;
pub mod projection;
pub mod resolvent;

pub use contour::{build_contour, contour_for_gap, gauss_legendre, riesz_factor, Contour};
pub use eigen::{eigensolve, BlockSpectrum, EigenOptions, Level, Spectrum};
pub use gap::{detect_gap, detect_gap_values, GapInfo};
pub use liouvillian::{double_commutator_t, liouvillian_solve, liouvillian_spectral};
pub use projection::{
    fermi_projection, offdiagonal_part, riesz_apply, riesz_projection, ProjBlock, Projection, ProjectorAction, RieszProjector,
};
pub use resolvent::{resolvent_apply, Resolvent};
