use faer::{c64, Mat};

use super::window::BulkWindow;
use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};
use crate::model::{OperatorMatrix, Spin};
use crate::spectral::ProjectorAction;

fn check_geometry(a: &crate::model::Geometry, w: &BulkWindow) -> Result<()> {
    if *a != *w.geometry {
        return Err(Error::GeometryMismatch("window and operator live on different geometries".into()));
    }
    Ok(())
}

/// `tau(A) = (1/|W|) sum_{x in W, s} A(x, s; x, s) dx` with `dx` the grid-cell
/// measure, i.e. the window average of the matrix diagonal.
pub fn trace_per_unit_volume_complex(a: &OperatorMatrix, window: &BulkWindow) -> Result<c64> {
    check_geometry(a.geometry(), window)?;
    let mut acc = ZERO;
    for s in Spin::BOTH {
        let b = a.block(s);
        for &x in &window.sites {
            acc += b.get(x, x);
        }
    }
    Ok(acc / window.area)
}

/// Real part of [`trace_per_unit_volume_complex`].
pub fn trace_per_unit_volume(a: &OperatorMatrix, window: &BulkWindow) -> Result<f64> {
    Ok(trace_per_unit_volume_complex(a, window)?.re)
}

/// Window columns `Pi E_W` of one spin block.
pub fn window_columns(p: &dyn ProjectorAction, spin: Spin, window: &BulkWindow) -> Result<Mat<c64>> {
    check_geometry(p.geometry(), window)?;
    let e = linalg::unit_columns(p.geometry().nsites(), &window.sites);
    p.apply_block(spin, e.as_ref())
}

/// `(1/|W|) sum_{x in W} Pi_s(x; x)` for one spin block.
pub fn block_density(p: &dyn ProjectorAction, spin: Spin, window: &BulkWindow) -> Result<f64> {
    let u = window_columns(p, spin, window)?;
    Ok(diagonal_density(&u, window))
}

pub(crate) fn diagonal_density(u: &Mat<c64>, window: &BulkWindow) -> f64 {
    window.sites.iter().enumerate().map(|(k, &x)| u[(x, k)].re).sum::<f64>() / window.area
}

/// Integrated spin density of states `tau(S^z Pi) = (tau(Pi^up) - tau(Pi^down)) / 2`.
pub fn isdos(p: &dyn ProjectorAction, window: &BulkWindow) -> Result<f64> {
    let up = block_density(p, Spin::Up, window)?;
    let down = block_density(p, Spin::Down, window)?;
    Ok(0.5 * (up - down))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{spin_operator, Geometry, HamiltonianSpec};
    use crate::spectral::{ProjBlock, Projection};
    use std::sync::Arc;

    #[test]
    fn identity_and_spin() {
        let g = Arc::new(Geometry::from_spec(&HamiltonianSpec::default()));
        let w = BulkWindow::default_for(&g).unwrap();
        let one = OperatorMatrix::identity(g.clone());
        assert!((trace_per_unit_volume(&one, &w).unwrap() - 2.0).abs() < 1e-14);
        assert!(trace_per_unit_volume(&spin_operator(&g), &w).unwrap().abs() < 1e-14);
        let n = g.nsites();
        let up_only = Projection::new(
            g.clone(),
            ProjBlock::Matrix(linalg::identity(n)),
            ProjBlock::Frame(Mat::zeros(n, 0)),
        )
        .unwrap();
        assert!((isdos(&up_only, &w).unwrap() - 0.5).abs() < 1e-14);
    }
}
