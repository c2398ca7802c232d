use super::chern::block_marker;
use super::window::BulkWindow;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{HamiltonianSpec, Spin};
use crate::spectral::{ProjBlock, Projection};

/// Outcome of the time-reversal check at zero field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeReversalReport {
    /// Frobenius norm of `Theta Pi Theta^{-1} - Pi`.
    pub operator_residual: f64,
    /// `|Ch(Pi^up) + Ch(Pi^down)|`.
    pub chern_sum: f64,
    pub ch_up: f64,
    pub sch: f64,
}

impl TimeReversalReport {
    pub fn residual(&self) -> f64 {
        self.operator_residual.max(self.chern_sum)
    }
}

/// `|| P - Q ||_F` for two blocks. Frames use
/// `||P - Q||^2 = ||(1 - P) W||^2 + ||(1 - Q) V||^2`, which avoids forming
/// dense projections and keeps full relative accuracy.
fn block_distance(a: &ProjBlock, b: &ProjBlock) -> f64 {
    match (a, b) {
        (ProjBlock::Frame(v), ProjBlock::Frame(w)) => {
            let outside = |x: &faer::Mat<faer::c64>, y: &faer::Mat<faer::c64>| {
                if x.ncols() == 0 {
                    return linalg::frobenius(y.as_ref()).powi(2);
                }
                let r = y - x * (x.adjoint() * y);
                linalg::frobenius(r.as_ref()).powi(2)
            };
            (outside(v, w) + outside(w, v)).sqrt()
        }
        _ => {
            let dense = |p: &ProjBlock| match p {
                ProjBlock::Frame(v) => v * v.adjoint(),
                ProjBlock::Matrix(m) => m.clone(),
            };
            linalg::frobenius((dense(a) - dense(b)).as_ref())
        }
    }
}

/// Checks `Theta Pi Theta^{-1} = Pi` with `Theta = i sigma^y K` and the
/// consequence `Ch(Pi^down) = -Ch(Pi^up)`. Only meaningful at zero field.
pub fn time_reversal_check(spec: &HamiltonianSpec, p: &Projection, window: &BulkWindow) -> Result<TimeReversalReport> {
    if spec.b1 != 0.0 || spec.b2 != 0.0 {
        return Err(Error::NonZeroField { b1: spec.b1, b2: spec.b2 });
    }
    let tp = p.time_reversed();
    let mut operator_residual = 0.0f64;
    for s in Spin::BOTH {
        let d = block_distance(tp.block(s), p.block(s));
        operator_residual = operator_residual.hypot(d);
    }
    let up = block_marker(p, Spin::Up, window)?;
    let down = block_marker(p, Spin::Down, window)?;
    Ok(TimeReversalReport {
        operator_residual,
        chern_sum: (up.chern + down.chern).abs(),
        ch_up: up.chern,
        sch: 0.5 * (up.chern - down.chern),
    })
}
