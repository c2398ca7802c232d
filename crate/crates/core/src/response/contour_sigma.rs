//! Zero-temperature, zero-frequency spin conductivity as a contour integral
//! of resolvents, traced per unit volume over a bulk window:
//!
//! ```text
//! sigma = -(1/4pi) tau( oint S^z (P1 R P2 R^2 - P1 R^2 P2 R) dw ).
//! ```
//!
//! For a window site `x` and `a = R e_x`, `b = R a`, `c = R^dagger P1 e_x`,
//! `d = R^dagger c`, the diagonal entry is `c^dagger P2 b - d^dagger P2 a`,
//! so each node costs four block solves against the window columns.
//!
//! The projector-sandwiched form
//! `-(1/2pi) tau( oint S^z (Pi R P1 R P2 R Pi - Pi R P2 R P1 R Pi) dw )`
//! agrees with it for the full trace (cyclicity and `[Pi, S^z] = 0`).

use std::f64::consts::PI;

use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::markers::window_columns;
use crate::markers::BulkWindow;
use crate::model::{OperatorMatrix, Spin};
use crate::spectral::resolvent::factorize;
use crate::spectral::{Contour, ProjectorAction};

/// Largest imaginary part accepted in the contour conductivity.
pub const SIGMA_IMAG_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroLimit {
    pub sigma: f64,
    pub sigma_imag: f64,
    /// Spin-resolved charge conductivities `(up, down)`; `sigma` is half
    /// their difference.
    pub per_block: [f64; 2],
    /// Projector-sandwiched evaluation, when a projection was supplied.
    pub sandwiched: Option<f64>,
    pub sandwiched_imag: Option<f64>,
}

fn sum_dots(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> c64 {
    linalg::column_dots(a, b).into_iter().sum()
}

/// Evaluates the contour conductivity of `h` with velocities `p1`, `p2`
/// over `window`; `S^z` enters through the spin of each block. With `pi`
/// set, the sandwiched variant is evaluated from the window columns of `pi`.
pub fn sigma_zero_limit(
    h: &OperatorMatrix,
    pi: Option<&dyn ProjectorAction>,
    p1: &OperatorMatrix,
    p2: &OperatorMatrix,
    contour: &Contour,
    window: &BulkWindow,
) -> Result<ZeroLimit> {
    let g = h.geometry();
    for op in [p1, p2] {
        if **op.geometry() != **g {
            return Err(Error::GeometryMismatch("velocity operators".into()));
        }
    }
    if *window.geometry != **g {
        return Err(Error::GeometryMismatch("window".into()));
    }
    if contour.nodes.len() != contour.weights.len() {
        return Err(Error::InvalidContour("nodes and weights differ in length".into()));
    }
    let e = linalg::unit_columns(g.nsites(), &window.sites);
    let mut pi_cols: [Option<Mat<c64>>; 2] = [None, None];
    if let Some(p) = pi {
        for s in Spin::BOTH {
            pi_cols[s.index()] = Some(window_columns(p, s, window)?);
        }
    }
    let p1e: Vec<Mat<c64>> = Spin::BOTH.iter().map(|&s| p1.block(s).mul_dense(e.as_ref())).collect();
    // columns: main up, main down, sandwiched up, sandwiched down
    let sums = contour.integrate(1, 4, |w| {
        let mut out = Mat::<c64>::zeros(1, 4);
        for s in Spin::BOTH {
            let lu = factorize(h.block(s), w)?;
            let (b1, b2) = (p1.block(s), p2.block(s));
            let a = lu.solve(e.as_ref());
            let b = lu.solve(a.as_ref());
            let c = lu.solve_adjoint(p1e[s.index()].as_ref());
            let d = lu.solve_adjoint(c.as_ref());
            let main = sum_dots(c.as_ref(), b2.mul_dense(b.as_ref()).as_ref())
                - sum_dots(d.as_ref(), b2.mul_dense(a.as_ref()).as_ref());
            out[(0, s.index())] = main;
            if let Some(u) = &pi_cols[s.index()] {
                let r1 = lu.solve(u.as_ref());
                let l = lu.solve_adjoint(u.as_ref());
                let r12 = lu.solve(b2.mul_dense(r1.as_ref()).as_ref());
                let r11 = lu.solve(b1.mul_dense(r1.as_ref()).as_ref());
                let sw = sum_dots(l.as_ref(), b1.mul_dense(r12.as_ref()).as_ref())
                    - sum_dots(l.as_ref(), b2.mul_dense(r11.as_ref()).as_ref());
                out[(0, 2 + s.index())] = sw;
            }
        }
        Ok(out)
    })?;
    let block = |k: usize| sums[(0, k)] * c64::new(-1.0 / (4.0 * PI) / window.area, 0.0);
    let up = block(0);
    let down = block(1);
    let total = 0.5 * (up - down);
    if total.im.abs() > SIGMA_IMAG_TOL {
        return Err(Error::Solver(format!("contour conductivity has imaginary part {:.3e}", total.im)));
    }
    let sandwiched = pi.map(|_| {
        let f = c64::new(-1.0 / (2.0 * PI) / window.area, 0.0);
        0.5 * (sums[(0, 2)] - sums[(0, 3)]) * f
    });
    Ok(ZeroLimit {
        sigma: total.re,
        sigma_imag: total.im,
        per_block: [up.re, down.re],
        sandwiched: sandwiched.map(|z| z.re),
        sandwiched_imag: sandwiched.map(|z| z.im),
    })
}
