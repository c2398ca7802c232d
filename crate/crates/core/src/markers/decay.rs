use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use super::window::BulkWindow;
use crate::model::Backend;

/// Log-linear fit `max |Pi(x; y)| ~ C exp(-alpha |x - y|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Decay rate; `+inf` when the kernel vanishes off the diagonal.
    pub alpha: f64,
    pub prefactor: f64,
    /// Coefficient of determination of the fit.
    pub r2: f64,
    /// Set when the fit is too poor (`r2 < 0.5`) to call the kernel localized.
    pub gapless: bool,
}

/// Minimum fit quality for an exponentially localized kernel.
pub const R2_GAPLESS: f64 = 0.5;

/// Fits the decay of the kernel from the window columns `Pi E_W` of both spin
/// blocks. Distances in `[2, L]` are binned (width 1 on the lattice, 1/4 on
/// the continuum) and the largest kernel norm of each bin enters the fit.
pub fn kernel_decay_profile(columns: [&Mat<c64>; 2], window: &BulkWindow) -> DecayFit {
    let g = &window.geometry;
    let width = match g.backend {
        Backend::Tightbinding => 1.0,
        Backend::Continuum => 0.25,
    };
    let (lo, hi) = (2.0, g.half_width as f64);
    let nbins = (((hi - lo) / width).floor() as usize).max(1);
    let mut best = vec![(0.0f64, 0.0f64); nbins];
    for u in columns {
        for (k, &x) in window.sites.iter().enumerate() {
            for y in 0..g.nsites() {
                let d = g.distance(x, y);
                if d < lo || d >= lo + nbins as f64 * width {
                    continue;
                }
                let b = ((d - lo) / width) as usize;
                let v = u[(y, k)].norm() / g.kernel_scale;
                if v > best[b].1 {
                    best[b] = (d, v);
                }
            }
        }
    }
    let pts: Vec<(f64, f64)> = best.into_iter().filter(|&(_, v)| v > 0.0).map(|(d, v)| (d, v.ln())).collect();
    if pts.is_empty() {
        return DecayFit { alpha: f64::INFINITY, prefactor: 0.0, r2: 1.0, gapless: false };
    }
    if pts.len() < 3 {
        return DecayFit { alpha: f64::NAN, prefactor: f64::NAN, r2: 0.0, gapless: true };
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 0.0 } else { sxy * sxy / (sxx * syy) };
    let alpha = -slope;
    DecayFit { alpha, prefactor: intercept.exp(), r2, gapless: r2 < R2_GAPLESS || !(alpha > 0.0) }
}
