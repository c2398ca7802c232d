//! Fukui–Hatsugai–Suzuki lattice Chern numbers.
//!
//! The filled-band frame `V(k)` is computed on an `N1 x N2` grid of the
//! Brillouin torus; link variables `U_j(k) = det V(k)^dagger V(k + e_j)`
//! are normalized to unit modulus and the plaquette field strength is the
//! principal argument of `U_1(k) U_2(k + e_1) / (U_1(k + e_2) U_2(k))`. The
//! sum of field strengths is `2 pi` times an integer by construction.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{build_twisted_hamiltonian, Backend, Boundary, HamiltonianSpec, Spin};
use crate::par;

/// Bloch Hamiltonian at reduced momentum `k in [0, 2 pi)^2`.
pub type BlochFactory = Arc<dyn Fn([f64; 2]) -> Result<Mat<c64>> + Send + Sync>;

/// Momentum grid and per-k Hamiltonian of one spin sector.
#[derive(Clone)]
pub struct BlochGrid {
    /// Dimension of the Bloch Hamiltonian (the magnetic cell size `q` for
    /// Harper models).
    pub q: usize,
    pub n1: usize,
    pub n2: usize,
    factory: BlochFactory,
}

impl std::fmt::Debug for BlochGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlochGrid").field("q", &self.q).field("n1", &self.n1).field("n2", &self.n2).finish()
    }
}

/// Largest magnetic cell tried when rationalizing a flux.
pub const MAX_CELL: usize = 64;

/// Outcome of one FHS evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FhsReport {
    pub chern: i64,
    /// Sum of field strengths divided by `2 pi` before rounding.
    pub raw: f64,
    pub rounding_residual: f64,
    /// Smallest `|det V(k)^dagger V(k + e_j)|` on the grid.
    pub min_link_modulus: f64,
}

/// `p/q` in lowest terms with `|x - p/q| <= 1e-9`, `q <= max_q`.
pub fn rationalize(x: f64, max_q: usize) -> Option<(i64, usize)> {
    (1..=max_q).find_map(|q| {
        let p = (x * q as f64).round();
        ((x * q as f64 - p).abs() <= 1e-9 * q as f64).then_some((p as i64, q))
    })
}

impl BlochGrid {
    pub fn new(q: usize, n1: usize, n2: usize, factory: BlochFactory) -> Result<Self> {
        if n1 < 6 || n2 < 6 {
            return Err(Error::InvalidSpec { field: "k_grid", reason: format!("need N1, N2 >= 6, got {n1} x {n2}") });
        }
        if q == 0 {
            return Err(Error::InvalidSpec { field: "q", reason: "empty Bloch Hamiltonian".into() });
        }
        Ok(BlochGrid { q, n1, n2, factory })
    }

    /// Harper model: square lattice, hopping `-1`, flux `2 pi p/q` per
    /// plaquette in the Landau gauge `A = (0, phi x1)`, magnetic cell of
    /// `q x 1` sites, constant on-site energy. Link phases follow the
    /// real-space builder, `H(x, x + e_j) = -exp(-i int A.dl)`.
    pub fn harper(p: i64, q: usize, onsite: f64, n1: usize, n2: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidSpec { field: "q", reason: "must be positive".into() });
        }
        let g = gcd(p.unsigned_abs() as usize, q);
        if g != 1 {
            return Err(Error::InvalidSpec { field: "flux", reason: format!("{p}/{q} is not in lowest terms") });
        }
        let phi = 2.0 * PI * p as f64 / q as f64;
        let factory: BlochFactory = Arc::new(move |k: [f64; 2]| {
            let mut h = Mat::<c64>::zeros(q, q);
            for m in 0..q {
                // y links: H((m, 0), (m, +-1)) e^{+-i k2}
                h[(m, m)] += c64::new(onsite - 2.0 * (k[1] - phi * m as f64).cos(), 0.0);
                // x link to m + 1, wrapping into the next cell with e^{i k1}
                let (to, phase) = if m + 1 < q { (m + 1, 0.0) } else { (0, k[0]) };
                let t = c64::from_polar(-1.0, phase);
                h[(m, to)] += t;
                h[(to, m)] += t.conj();
            }
            Ok(h)
        });
        BlochGrid::new(q, n1, n2, factory)
    }

    /// Harper grid matching one spin sector of a tight-binding spec. The
    /// sector flux must be rational with denominator at most [`MAX_CELL`].
    pub fn harper_spec(spec: &HamiltonianSpec, spin: Spin, n: usize) -> Result<Self> {
        if spec.backend != Backend::Tightbinding {
            return Err(Error::InvalidSpec { field: "backend", reason: "Harper grids need the tight-binding backend".into() });
        }
        let flux = spec.sector_field(spin.sign()) / (2.0 * PI);
        let (p, q) = rationalize(flux, MAX_CELL).ok_or_else(|| Error::InvalidSpec {
            field: "tb_flux_per_plaquette",
            reason: format!("sector flux {flux} has no denominator <= {MAX_CELL}"),
        })?;
        let zeeman = 2.0 * spec.b1 * spec.zeeman_coupling * spin.sz();
        BlochGrid::harper(p, q, zeeman, n, n)
    }

    /// Twisted boundary conditions on the torus version of `spec`: the
    /// "momentum" is the pair of twist angles and the Bloch Hamiltonian is
    /// the whole torus block. Works for both backends.
    pub fn twisted_torus(spec: &HamiltonianSpec, spin: Spin, n: usize) -> Result<Self> {
        let torus = spec.with_boundary(Boundary::Torus);
        torus.validate()?;
        let dim = build_twisted_hamiltonian(&torus, [0.0, 0.0])?.block(spin).dim();
        let factory: BlochFactory =
            Arc::new(move |k: [f64; 2]| Ok(build_twisted_hamiltonian(&torus, k)?.block(spin).to_dense()));
        BlochGrid::new(dim, n, n, factory)
    }

    /// Harper grid on the lattice, twisted torus on the continuum.
    pub fn for_spec(spec: &HamiltonianSpec, spin: Spin, n: usize) -> Result<Self> {
        match spec.backend {
            Backend::Tightbinding => BlochGrid::harper_spec(spec, spin, n),
            Backend::Continuum => BlochGrid::twisted_torus(spec, spin, n),
        }
    }

    pub fn momentum(&self, i: usize, j: usize) -> [f64; 2] {
        [2.0 * PI * (i % self.n1) as f64 / self.n1 as f64, 2.0 * PI * (j % self.n2) as f64 / self.n2 as f64]
    }

    pub fn hamiltonian(&self, k: [f64; 2]) -> Result<Mat<c64>> {
        let h = (self.factory)(k)?;
        if (h.nrows(), h.ncols()) != (self.q, self.q) {
            return Err(Error::Shape(format!("Bloch Hamiltonian is {}x{}, expected {}", h.nrows(), h.ncols(), self.q)));
        }
        Ok(h)
    }

    /// Eigenpairs on every grid point, row-major in `(i, j)` with `j` fastest.
    fn spectra(&self) -> Result<Vec<(Vec<f64>, Mat<c64>)>> {
        par::try_map_range(self.n1 * self.n2, |idx| {
            let (i, j) = (idx / self.n2, idx % self.n2);
            linalg::hermitian_eigen(self.hamiltonian(self.momentum(i, j))?.as_ref())
        })
    }

    /// Number of bands below `fermi`, which must be the same at every `k`.
    pub fn bands_below(&self, fermi: f64) -> Result<usize> {
        let mut count = None;
        for (idx, (vals, _)) in self.spectra()?.iter().enumerate() {
            if let Some(l) = vals.iter().find(|l| (*l - fermi).abs() < 1e-10) {
                return Err(Error::FermiInSpectrum { fermi, eigenvalue: *l });
            }
            let c = vals.iter().filter(|&&l| l < fermi).count();
            match count {
                None => count = Some(c),
                Some(c0) if c0 != c => {
                    return Err(Error::DegenerateGap(format!(
                        "band count below {fermi} changes on the Bloch grid ({c0} vs {c} at k index {idx})"
                    )))
                }
                _ => {}
            }
        }
        Ok(count.unwrap_or(0))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Chern number of the lowest `bands_filled` bands with the full report.
pub fn fukui_hatsugai(bloch: &BlochGrid, bands_filled: usize) -> Result<FhsReport> {
    if bands_filled > bloch.q {
        return Err(Error::InvalidSpec {
            field: "bands_filled",
            reason: format!("{bands_filled} bands requested, Bloch Hamiltonian has {}", bloch.q),
        });
    }
    if bands_filled == 0 {
        return Ok(FhsReport { chern: 0, raw: 0.0, rounding_residual: 0.0, min_link_modulus: 1.0 });
    }
    let spectra = bloch.spectra()?;
    let (n1, n2) = (bloch.n1, bloch.n2);
    for (vals, _) in &spectra {
        if bands_filled < vals.len() && vals[bands_filled] - vals[bands_filled - 1] < 1e-10 {
            return Err(Error::DegenerateGap(format!(
                "gap above band {bands_filled} closes on the Bloch grid (width {:.3e})",
                vals[bands_filled] - vals[bands_filled - 1]
            )));
        }
    }
    let frame = |i: usize, j: usize| spectra[(i % n1) * n2 + (j % n2)].1.subcols(0, bands_filled);
    // links[dir][i * n2 + j]
    let links = par::try_map_range(2 * n1 * n2, |idx| {
        let (dir, rest) = (idx / (n1 * n2), idx % (n1 * n2));
        let (i, j) = (rest / n2, rest % n2);
        let (a, b) = (frame(i, j), if dir == 0 { frame(i + 1, j) } else { frame(i, j + 1) });
        let overlap = a.adjoint() * b;
        let det = overlap.determinant();
        if det.norm() < 1e-10 {
            return Err(Error::DegenerateGap(format!(
                "link determinant {:.3e} at k index ({i}, {j}): gap closes or the grid is too coarse",
                det.norm()
            )));
        }
        Ok(det)
    })?;
    let min_link_modulus = links.iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
    let u = |dir: usize, i: usize, j: usize| {
        let d = links[dir * n1 * n2 + (i % n1) * n2 + (j % n2)];
        d / d.norm()
    };
    let mut total = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            let plaquette = u(0, i, j) * u(1, i + 1, j) * (u(0, i, j + 1) * u(1, i, j)).conj();
            total += plaquette.arg();
        }
    }
    let raw = total / (2.0 * PI);
    let chern = raw.round();
    let rounding_residual = (raw - chern).abs();
    if rounding_residual > 1e-6 {
        return Err(Error::Solver(format!("FHS field strengths sum to {raw}, not an integer")));
    }
    Ok(FhsReport { chern: chern as i64, raw, rounding_residual, min_link_modulus })
}

/// Integer Chern number of the lowest `bands_filled` bands.
pub fn fukui_hatsugai_chern(bloch: &BlochGrid, bands_filled: usize) -> Result<i64> {
    Ok(fukui_hatsugai(bloch, bands_filled)?.chern)
}

/// FHS Chern numbers `(Ch_up, Ch_down)` of `spec` at Fermi energy `fermi`,
/// on `n x n` grids.
pub fn spin_resolved_chern(spec: &HamiltonianSpec, fermi: f64, n: usize) -> Result<[i64; 2]> {
    let mut out = [0; 2];
    for s in Spin::BOTH {
        let grid = BlochGrid::for_spec(spec, s, n)?;
        let filled = grid.bands_below(fermi)?;
        out[s.index()] = fukui_hatsugai_chern(&grid, filled)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationalize_finds_lowest_terms() {
        assert_eq!(rationalize(1.0 / 3.0, 64), Some((1, 3)));
        assert_eq!(rationalize(-0.25, 64), Some((-1, 4)));
        assert_eq!(rationalize(0.0, 64), Some((0, 1)));
        assert_eq!(rationalize(std::f64::consts::FRAC_1_SQRT_2, 64), None);
    }

    #[test]
    fn harper_spectrum_matches_real_space_torus() {
        // the union of Bloch spectra over the 6 x 6 magnetic-cell grid of a
        // 6 x 6 torus is the torus spectrum
        let spec = HamiltonianSpec {
            boundary: Boundary::Torus,
            half_width_l: 3,
            tb_flux_per_plaquette: 1.0 / 3.0,
            ..HamiltonianSpec::default()
        };
        let h = crate::model::build_hamiltonian(&spec).unwrap();
        let (mut torus, _) = linalg::hermitian_eigen(h.block(Spin::Up).to_dense().as_ref()).unwrap();
        let grid = BlochGrid::harper(1, 3, 0.0, 6, 6).unwrap();
        let mut bloch = Vec::new();
        for i in 0..2 {
            for j in 0..6 {
                // 6-site torus: k1 in steps of 2 pi / 2 over the 3-site cell
                let k = [2.0 * PI * i as f64 / 2.0, 2.0 * PI * j as f64 / 6.0];
                let (v, _) = linalg::hermitian_eigen(grid.hamiltonian(k).unwrap().as_ref()).unwrap();
                bloch.extend(v);
            }
        }
        torus.sort_by(f64::total_cmp);
        bloch.sort_by(f64::total_cmp);
        for (a, b) in torus.iter().zip(&bloch) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}
