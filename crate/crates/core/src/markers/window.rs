use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Backend, Geometry};

/// Set of unit cells over which traces per unit volume are averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct BulkWindow {
    pub geometry: Arc<Geometry>,
    /// Grid sites inside the window.
    pub sites: Vec<usize>,
    /// Area `|W|` in unit cells.
    pub area: f64,
    /// Distance from the window to the edge of the sample
    /// (infinite on the torus).
    pub buffer_distance: f64,
}

/// Default minimum buffer between window and sample edge.
pub const DEFAULT_MIN_BUFFER: f64 = 1.0;

impl BulkWindow {
    /// Window made of the unit cells `[c1 - 1/2, c1 + 1/2) x [c2 - 1/2, c2 + 1/2)`
    /// on the continuum, or the sites `c` themselves on the lattice.
    pub fn from_cells(geometry: &Arc<Geometry>, cells: &[(i64, i64)], min_buffer: f64) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidWindow("no cells".into()));
        }
        let mut sorted = cells.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != cells.len() {
            return Err(Error::InvalidWindow("repeated cells".into()));
        }
        let ppc = geometry.points_per_cell as i64;
        let mut sites = Vec::new();
        let (lo, hi) = geometry.sample_bounds();
        let mut buffer = f64::INFINITY;
        for &(c1, c2) in &sorted {
            let mut cell_sites = Vec::new();
            let (offsets, half) = match geometry.backend {
                Backend::Continuum => ((-ppc / 2)..(ppc - ppc / 2), 0.5),
                Backend::Tightbinding => (0..1, 0.5),
            };
            for j2 in offsets.clone() {
                for j1 in offsets.clone() {
                    let x = [c1 as f64 + j1 as f64 * geometry.spacing, c2 as f64 + j2 as f64 * geometry.spacing];
                    match (geometry.index_1d(x[0]), geometry.index_1d(x[1])) {
                        (Some(a), Some(b)) => cell_sites.push(geometry.index(a, b)),
                        _ => {
                            return Err(Error::InvalidWindow(format!(
                                "cell ({c1}, {c2}) reaches outside the sample or onto deleted boundary sites"
                            )))
                        }
                    }
                }
            }
            if !geometry.is_torus() {
                for c in [c1 as f64, c2 as f64] {
                    buffer = buffer.min((c - half - lo).min(hi - (c + half)));
                }
            }
            sites.extend(cell_sites);
        }
        if buffer < min_buffer {
            return Err(Error::InvalidWindow(format!("buffer {buffer} below the required {min_buffer}")));
        }
        Ok(BulkWindow { geometry: geometry.clone(), sites, area: sorted.len() as f64, buffer_distance: buffer })
    }

    /// Central square block of `m x m` cells. On the lattice the block is
    /// centered on the sample center `1/2`, so `m` must be even there.
    pub fn central_block(geometry: &Arc<Geometry>, m: usize, min_buffer: f64) -> Result<Self> {
        let start = match geometry.backend {
            Backend::Continuum => -((m as i64) / 2),
            Backend::Tightbinding => {
                if m % 2 != 0 {
                    return Err(Error::InvalidWindow("lattice blocks must have even side".into()));
                }
                1 - (m as i64) / 2
            }
        };
        let cells: Vec<(i64, i64)> =
            (0..m as i64).flat_map(|b| (0..m as i64).map(move |a| (start + a, start + b))).collect();
        BulkWindow::from_cells(geometry, &cells, min_buffer)
    }

    /// Default window: the central unit cell on the continuum, a central
    /// block of side about `L/2` on the lattice.
    pub fn default_for(geometry: &Arc<Geometry>) -> Result<Self> {
        let m = match geometry.backend {
            Backend::Continuum => 1,
            Backend::Tightbinding => (2 * ((geometry.half_width as f64 / 4.0).round() as usize)).max(2),
        };
        BulkWindow::central_block(geometry, m, DEFAULT_MIN_BUFFER)
    }

    /// Every site of a torus, one cell per unit area.
    pub fn whole_torus(geometry: &Arc<Geometry>) -> Result<Self> {
        if !geometry.is_torus() {
            return Err(Error::InvalidWindow("whole-sample windows are only meaningful on the torus".into()));
        }
        let p = geometry.period();
        Ok(BulkWindow {
            geometry: geometry.clone(),
            sites: (0..geometry.nsites()).collect(),
            area: p * p,
            buffer_distance: f64::INFINITY,
        })
    }

    /// The same window translated by whole cells.
    pub fn shifted(&self, by: (i64, i64), min_buffer: f64) -> Result<Self> {
        let cells = self.cells();
        let moved: Vec<(i64, i64)> = cells.iter().map(|&(a, b)| (a + by.0, b + by.1)).collect();
        BulkWindow::from_cells(&self.geometry, &moved, min_buffer)
    }

    /// Cells making up the window (recovered from the site list).
    pub fn cells(&self) -> Vec<(i64, i64)> {
        let g = &self.geometry;
        let mut out: Vec<(i64, i64)> = self
            .sites
            .iter()
            .map(|&k| {
                let x = g.coords(k);
                ((x[0] + 1e-9).round() as i64, (x[1] + 1e-9).round() as i64)
            })
            .collect();
        // the continuum cell around c holds points in [c - 1/2, c + 1/2)
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Geometry-independent window description, resolved per sample.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowParams {
    /// Side of the central block in cells; `None` picks [`BulkWindow::default_for`].
    #[serde(default)]
    pub block_side: Option<usize>,
    #[serde(default = "default_min_buffer")]
    pub min_buffer: f64,
}

fn default_min_buffer() -> f64 {
    DEFAULT_MIN_BUFFER
}

impl Default for WindowParams {
    fn default() -> Self {
        WindowParams { block_side: None, min_buffer: DEFAULT_MIN_BUFFER }
    }
}

impl WindowParams {
    pub fn resolve(&self, geometry: &Arc<Geometry>) -> Result<BulkWindow> {
        if !(self.min_buffer >= 0.0) {
            return Err(Error::InvalidWindow(format!("min_buffer must be >= 0, got {}", self.min_buffer)));
        }
        if geometry.is_torus() {
            return BulkWindow::whole_torus(geometry);
        }
        match self.block_side {
            Some(m) => BulkWindow::central_block(geometry, m, self.min_buffer),
            None => {
                let w = BulkWindow::default_for(geometry)?;
                if w.buffer_distance < self.min_buffer {
                    return Err(Error::InvalidWindow(format!(
                        "buffer {} below the required {}",
                        w.buffer_distance, self.min_buffer
                    )));
                }
                Ok(w)
            }
        }
    }
}
