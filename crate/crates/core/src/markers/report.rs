use serde::{Deserialize, Serialize};

use super::chern::block_marker;
use super::decay::{kernel_decay_profile, DecayFit};
use super::window::BulkWindow;
use crate::error::{Error, Result};
use crate::model::Spin;
use crate::spectral::ProjectorAction;

/// Markers of one Fermi projection over one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkerReport {
    pub isdos: f64,
    pub ch_up: f64,
    pub ch_down: f64,
    pub sch: f64,
    pub nearest_int_up: i64,
    pub nearest_int_down: i64,
    /// Largest distance of `ch_up`, `ch_down` to the nearest integer and of
    /// `sch` to the nearest half-integer.
    pub quantization_residual: f64,
    pub decay_rate_alpha: f64,
    pub decay_fit_r2: f64,
}

/// Largest imaginary part of a marker accepted before it is discarded.
pub const MARKER_IMAG_TOL: f64 = 1e-8;

/// Markers together with the diagnostics that are not part of the report.
#[derive(Debug, Clone)]
pub struct MarkerDetails {
    pub report: MarkerReport,
    pub decay: DecayFit,
    pub chern_imag: [f64; 2],
    pub density: [f64; 2],
}

/// Computes every marker of `p` over `window`, refusing markers whose
/// imaginary part exceeds `imag_tol`.
pub fn compute_markers(p: &dyn ProjectorAction, window: &BulkWindow, imag_tol: f64) -> Result<MarkerDetails> {
    let up = block_marker(p, Spin::Up, window)?;
    let down = block_marker(p, Spin::Down, window)?;
    for b in [&up, &down] {
        if b.chern_imag.abs() > imag_tol {
            return Err(Error::Solver(format!(
                "Chern marker of the {:?} block has imaginary part {:.3e}",
                b.spin, b.chern_imag
            )));
        }
    }
    let decay = kernel_decay_profile([&up.columns, &down.columns], window);
    let sch = 0.5 * (up.chern - down.chern);
    let residual = (up.chern - up.chern.round())
        .abs()
        .max((down.chern - down.chern.round()).abs())
        .max((sch - (2.0 * sch).round() / 2.0).abs());
    let report = MarkerReport {
        isdos: 0.5 * (up.density - down.density),
        ch_up: up.chern,
        ch_down: down.chern,
        sch,
        nearest_int_up: up.chern.round() as i64,
        nearest_int_down: down.chern.round() as i64,
        quantization_residual: residual,
        decay_rate_alpha: decay.alpha,
        decay_fit_r2: decay.r2,
    };
    Ok(MarkerDetails { report, decay, chern_imag: [up.chern_imag, down.chern_imag], density: [up.density, down.density] })
}
