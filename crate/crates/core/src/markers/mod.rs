//! Trace per unit volume, integrated spin density of states, Chern and spin
//! Chern markers, time-reversal checks and kernel-decay diagnostics.

pub mod chern;
pub mod decay;
pub mod report;
pub mod time_reversal;
pub mod trace;
pub mod window;

pub use chern::{block_marker, chern_marker, chern_marker_dense, spin_chern_marker, BlockMarker};
pub use decay::{kernel_decay_profile, DecayFit, R2_GAPLESS};
pub use report::{compute_markers, MarkerDetails, MarkerReport, MARKER_IMAG_TOL};
pub use time_reversal::{time_reversal_check, TimeReversalReport};
pub use trace::{block_density, isdos, trace_per_unit_volume, trace_per_unit_volume_complex, window_columns};
pub use window::{BulkWindow, WindowParams, DEFAULT_MIN_BUFFER};
