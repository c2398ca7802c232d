//! Numerical laboratory for the spin Středa relation of two-dimensional
//! Bloch–Landau–Pauli Hamiltonians with conserved `s^z`.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`model`] builds discretized Hamiltonians together with the position,
//!   velocity and spin operators on the same lattice.
//! * [`spectral`] diagonalizes, locates gaps, builds contours and evaluates
//!   Riesz projections, resolvents and the off-diagonal Liouvillian inverse.
//! * [`markers`] contains the trace per unit volume, the integrated spin
//!   density of states and the (spin) Chern markers.
//! * [`response`] evaluates Kubo spin conductivities and the finite-difference
//!   Středa derivative, and assembles the three-way comparison.
//! * [`oracle`] holds independent references: Fukui–Hatsugai Chern numbers,
//!   closed-form Landau-level values and brute-force operator identities.
//!
//! All operators commute with `S^z` by construction, so every spinful
//! operator is stored as two independent spin blocks.

pub mod error;
pub mod linalg;
pub mod markers;
pub mod model;
pub mod oracle;
pub mod par;
pub mod response;
pub mod spectral;

pub use error::{Error, Result};
pub use faer::{self, c64};
pub use markers::{BulkWindow, MarkerReport, WindowParams};
pub use model::{Backend, Boundary, Geometry, HamiltonianSpec, OperatorMatrix, Spin};
pub use response::{KuboParams, StredaOptions, StredaReport};
pub use spectral::{Contour, EigenOptions, GapInfo, Projection, Spectrum};

/// Version tag mixed into cache keys and reports.
pub const CODE_VERSION: &str = concat!("stredalab-", env!("CARGO_PKG_VERSION"));
