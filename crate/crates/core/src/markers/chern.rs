//! Chern and spin Chern markers.
//!
//! `Ch(Pi) = 2 pi i tau(Pi [[X1, Pi], [X2, Pi]] Pi)`. Expanding the double
//! commutator and using `[X1, X2] = 0`, the diagonal entry at `x` equals
//! `y1^dagger Pi y2 - y2^dagger Pi y1` with `y_j = X_j Pi e_x`, so only the
//! window columns of `Pi` and one more application of `Pi` are needed.

use faer::{c64, Mat};

use super::trace::{diagonal_density, window_columns};
use super::window::BulkWindow;
use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};
use crate::model::{Geometry, Spin};
use crate::spectral::ProjectorAction;

/// Marker data of one spin block.
#[derive(Debug, Clone)]
pub struct BlockMarker {
    pub spin: Spin,
    /// `Ch(Pi^s)` (real part).
    pub chern: f64,
    /// Imaginary part discarded from `Ch(Pi^s)`.
    pub chern_imag: f64,
    /// `tau(Pi^s)`.
    pub density: f64,
    /// Window columns `Pi^s E_W`, kept for kernel diagnostics.
    pub columns: Mat<c64>,
}

fn coordinate_rows(g: &Geometry, j: usize, m: &Mat<c64>) -> Mat<c64> {
    let d: Vec<f64> = (0..g.nsites()).map(|k| g.coords(k)[j]).collect();
    linalg::scale_rows(&d, m.as_ref())
}

/// Chern marker of one spin block over `window`.
pub fn block_marker(p: &dyn ProjectorAction, spin: Spin, window: &BulkWindow) -> Result<BlockMarker> {
    let g = p.geometry().clone();
    if g.is_torus() {
        return Err(Error::PositionOnTorus);
    }
    let u = window_columns(p, spin, window)?;
    let y1 = coordinate_rows(&g, 0, &u);
    let y2 = coordinate_rows(&g, 1, &u);
    let z1 = p.apply_block(spin, y1.as_ref())?;
    let z2 = p.apply_block(spin, y2.as_ref())?;
    let c: c64 = linalg::column_dots(y1.as_ref(), z2.as_ref()).into_iter().sum();
    let d: c64 = linalg::column_dots(y2.as_ref(), z1.as_ref()).into_iter().sum();
    let ch = c64::new(0.0, 2.0 * std::f64::consts::PI) * (c - d) / window.area;
    Ok(BlockMarker { spin, chern: ch.re, chern_imag: ch.im, density: diagonal_density(&u, window), columns: u })
}

/// `Ch(Pi)` of the full (spin-summed) projection.
pub fn chern_marker(p: &dyn ProjectorAction, window: &BulkWindow) -> Result<f64> {
    let up = block_marker(p, Spin::Up, window)?;
    let down = block_marker(p, Spin::Down, window)?;
    Ok(up.chern + down.chern)
}

/// `SCh(Pi) = 2 pi i tau(S^z Pi [[X1, Pi], [X2, Pi]] Pi) = (Ch(Pi^up) - Ch(Pi^down)) / 2`.
pub fn spin_chern_marker(p: &dyn ProjectorAction, window: &BulkWindow) -> Result<f64> {
    let up = block_marker(p, Spin::Up, window)?;
    let down = block_marker(p, Spin::Down, window)?;
    Ok(0.5 * (up.chern - down.chern))
}

/// The literal dense evaluation `2 pi i tau(Pi [[X1, Pi], [X2, Pi]] Pi)` of one
/// block, forming every commutator explicitly. Quadratic memory; for tests
/// and small instances.
pub fn chern_marker_dense(pi: &Mat<c64>, g: &Geometry, window: &BulkWindow) -> c64 {
    let n = g.nsites();
    let x = |j: usize| Mat::from_fn(n, n, |a, b| if a == b { c64::new(g.coords(a)[j], 0.0) } else { ZERO });
    let (x1, x2) = (x(0), x(1));
    let a1 = linalg::commutator(x1.as_ref(), pi.as_ref());
    let a2 = linalg::commutator(x2.as_ref(), pi.as_ref());
    let dc = linalg::commutator(a1.as_ref(), a2.as_ref());
    let m = pi * dc * pi;
    let tr: c64 = window.sites.iter().map(|&k| m[(k, k)]).sum();
    c64::new(0.0, 2.0 * std::f64::consts::PI) * tr / window.area
}
