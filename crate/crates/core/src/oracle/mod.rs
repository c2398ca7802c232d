//! Independent references: Fukui–Hatsugai–Suzuki Chern numbers on Bloch
//! grids, closed-form Landau-level values and brute-force operator
//! identities on small random matrices.

pub mod brute;
pub mod fhs;
pub mod landau;

pub use brute::{
    brute_force_identities, check_instance, random_instance, BruteForceReport, BruteInstance, MAX_BRUTE_DIM,
};
pub use fhs::{fukui_hatsugai, fukui_hatsugai_chern, rationalize, spin_resolved_chern, BlochGrid, FhsReport};
pub use landau::{landau_reference, LandauReference};
