use serde::{Deserialize, Serialize};

use super::eigen::Spectrum;
use crate::error::{Error, Result};
use crate::model::Spin;

/// Spectral gap around the Fermi energy. An empty side of the spectrum is
/// represented by an infinite edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapInfo {
    pub fermi_energy: f64,
    pub gap_lower: f64,
    pub gap_upper: f64,
    pub rank_below: usize,
    /// Eigenvalues below `E_F` in the up and down blocks.
    pub rank_per_spin: [usize; 2],
}

impl GapInfo {
    pub fn width(&self) -> f64 {
        self.gap_upper - self.gap_lower
    }

    pub fn rank(&self, spin: Spin) -> usize {
        self.rank_per_spin[spin.index()]
    }

    /// Distance from `E_F` to the nearest eigenvalue.
    pub fn fermi_distance(&self) -> f64 {
        (self.fermi_energy - self.gap_lower).min(self.gap_upper - self.fermi_energy)
    }
}

fn collision_tol(fermi: f64) -> f64 {
    1e-10 * fermi.abs().max(1.0)
}

/// Gap of a plain eigenvalue list (one spin sector).
pub fn detect_gap_values(eigenvalues: &[f64], fermi: f64) -> Result<GapInfo> {
    if !fermi.is_finite() {
        return Err(Error::InvalidSpec { field: "fermi_energy", reason: format!("must be finite, got {fermi}") });
    }
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut rank = 0;
    for &l in eigenvalues {
        if (l - fermi).abs() <= collision_tol(fermi) {
            return Err(Error::FermiInSpectrum { fermi, eigenvalue: l });
        }
        if l < fermi {
            rank += 1;
            lower = lower.max(l);
        } else {
            upper = upper.min(l);
        }
    }
    Ok(GapInfo { fermi_energy: fermi, gap_lower: lower, gap_upper: upper, rank_below: rank, rank_per_spin: [rank, 0] })
}

/// Gap of a spin-resolved spectrum around `fermi`.
pub fn detect_gap(spectrum: &Spectrum, fermi: f64) -> Result<GapInfo> {
    let mut ranks = [0usize; 2];
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for b in &spectrum.blocks {
        if fermi >= b.computed_up_to() {
            return Err(Error::FermiAboveComputed { fermi, computed_up_to: b.computed_up_to() });
        }
        let g = detect_gap_values(&b.eigenvalues, fermi)?;
        ranks[b.spin.index()] = g.rank_below;
        lower = lower.max(g.gap_lower);
        upper = upper.min(g.gap_upper);
    }
    Ok(GapInfo { fermi_energy: fermi, gap_lower: lower, gap_upper: upper, rank_below: ranks[0] + ranks[1], rank_per_spin: ranks })
}
