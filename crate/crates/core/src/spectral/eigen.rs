//! Dense and partial (shift-invert) eigensolvers, one spin block at a time.

use std::sync::Arc;

use faer::{c64, Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Csr, ShiftedLu, ZERO};
use crate::model::{Block, Geometry, OperatorMatrix, Spin};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Largest block dimension diagonalized densely.
    pub dense_cutoff: usize,
    /// Above the cutoff, compute the lowest eigenpairs up to just past this
    /// energy instead of failing.
    pub partial_up_to: Option<f64>,
    /// Eigenpairs kept above `partial_up_to`.
    pub partial_extra: usize,
    /// Seed of the random start block of the partial solver.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { dense_cutoff: 4096, partial_up_to: None, partial_extra: 4, seed: 0x5eed }
    }
}

impl EigenOptions {
    pub fn partial(fermi: f64) -> Self {
        EigenOptions { partial_up_to: Some(fermi), ..Default::default() }
    }
}

/// Eigenpairs of one spin block. A partial block holds the lowest
/// `eigenvalues.len()` eigenpairs: every eigenvalue `<= computed_up_to()`
/// is present.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpectrum {
    pub spin: Spin,
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat<c64>,
    pub complete: bool,
}

impl BlockSpectrum {
    pub fn computed_up_to(&self) -> f64 {
        if self.complete {
            f64::INFINITY
        } else {
            self.eigenvalues.last().copied().unwrap_or(f64::NEG_INFINITY)
        }
    }

    /// Columns of the eigenvectors with eigenvalue below `e`.
    pub fn frame_below(&self, e: f64) -> Mat<c64> {
        let r = self.eigenvalues.iter().take_while(|&&l| l < e).count();
        self.eigenvectors.subcols(0, r).to_owned()
    }
}

/// Spectrum of a spin-conserving operator, stored per spin block.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub geometry: Arc<Geometry>,
    pub blocks: [BlockSpectrum; 2],
}

/// One eigenvalue of the merged, labeled list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub spin: Spin,
    pub index: usize,
}

impl Spectrum {
    pub fn block(&self, spin: Spin) -> &BlockSpectrum {
        &self.blocks[spin.index()]
    }

    pub fn is_complete(&self) -> bool {
        self.blocks.iter().all(|b| b.complete)
    }

    /// Ascending eigenvalues of both blocks, up before down on ties.
    pub fn levels(&self) -> Vec<Level> {
        let mut out: Vec<Level> = self
            .blocks
            .iter()
            .flat_map(|b| b.eigenvalues.iter().enumerate().map(move |(index, &energy)| Level { energy, spin: b.spin, index }))
            .collect();
        out.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.spin.index().cmp(&b.spin.index())).then(a.index.cmp(&b.index)));
        out
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.levels().into_iter().map(|l| l.energy).collect()
    }

    /// `max ||H v - lambda v||` over the stored pairs.
    pub fn residual(&self, h: &OperatorMatrix) -> f64 {
        let mut worst = 0.0f64;
        for b in &self.blocks {
            let hv = h.block(b.spin).mul_dense(b.eigenvectors.as_ref());
            for (k, &l) in b.eigenvalues.iter().enumerate() {
                let r: f64 = (0..b.dim).map(|i| (hv[(i, k)] - b.eigenvectors[(i, k)] * l).norm_sqr()).sum();
                worst = worst.max(r.sqrt());
            }
        }
        worst
    }

    /// `max |V^dagger V - 1|` over both blocks.
    pub fn orthonormality_residual(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let g = b.eigenvectors.adjoint() * &b.eigenvectors;
                linalg::max_abs((g - linalg::identity(b.eigenvectors.ncols())).as_ref())
            })
            .fold(0.0, f64::max)
    }
}

/// Rotates each column so its first significant entry is real and positive.
fn fix_phases(v: &mut Mat<c64>) {
    for k in 0..v.ncols() {
        let big = (0..v.nrows()).map(|i| v[(i, k)].norm()).fold(0.0, f64::max);
        if let Some(i) = (0..v.nrows()).find(|&i| v[(i, k)].norm() > 1e-3 * big) {
            let p = v[(i, k)];
            let rot = p.conj() / p.norm();
            for r in 0..v.nrows() {
                v[(r, k)] *= rot;
            }
        }
    }
}

fn norm_estimate(b: &Block) -> f64 {
    match b {
        Block::Sparse(m) => {
            let (lo, hi) = m.gershgorin_bounds();
            lo.abs().max(hi.abs())
        }
        Block::Dense(m) => {
            let mut best = 0.0f64;
            for i in 0..m.nrows() {
                best = best.max((0..m.ncols()).map(|j| m[(i, j)].norm()).sum());
            }
            best
        }
    }
}

/// Diagonalizes both spin blocks.
pub fn eigensolve(h: &OperatorMatrix, opts: &EigenOptions) -> Result<Spectrum> {
    let herm = h.hermiticity_residual();
    if herm > 1e-12 {
        return Err(Error::NotHermitian { residual: herm });
    }
    let blocks = par::try_map_range(2, |i| {
        let spin = Spin::BOTH[i];
        let block = h.block(spin);
        let n = block.dim();
        if n <= opts.dense_cutoff {
            let (vals, mut vecs) = linalg::hermitian_eigen(block.to_dense().as_ref())?;
            fix_phases(&mut vecs);
            Ok(BlockSpectrum { spin, dim: n, eigenvalues: vals, eigenvectors: vecs, complete: true })
        } else if let Some(up_to) = opts.partial_up_to {
            let csr = match block {
                Block::Sparse(m) => m.clone(),
                Block::Dense(m) => Csr::from_dense(m.as_ref()),
            };
            let (vals, mut vecs) = lowest_eigenpairs_through(&csr, up_to, opts.partial_extra, opts.seed)?;
            fix_phases(&mut vecs);
            let complete = vals.len() == n;
            Ok(BlockSpectrum { spin, dim: n, eigenvalues: vals, eigenvectors: vecs, complete })
        } else {
            Err(Error::DimensionTooLarge { dim: n, cutoff: opts.dense_cutoff })
        }
    })?;
    let mut it = blocks.into_iter();
    let up = it.next().expect("two blocks");
    let down = it.next().expect("two blocks");
    Ok(Spectrum { geometry: h.geometry().clone(), blocks: [up, down] })
}

/// Modified Gram-Schmidt, applied twice for stability. Drops nothing: the
/// random start block keeps full rank in practice.
fn orthonormalize(m: &mut Mat<c64>) {
    for _ in 0..2 {
        for k in 0..m.ncols() {
            for j in 0..k {
                let d: c64 = (0..m.nrows()).map(|i| m[(i, j)].conj() * m[(i, k)]).sum();
                for i in 0..m.nrows() {
                    let v = m[(i, j)];
                    m[(i, k)] -= d * v;
                }
            }
            let nrm: f64 = (0..m.nrows()).map(|i| m[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            for i in 0..m.nrows() {
                m[(i, k)] /= nrm;
            }
        }
    }
}

/// Lowest eigenpairs of a sparse Hermitian matrix, enough of them that at
/// least `extra` converged eigenvalues lie above `up_to`. Block
/// shift-invert subspace iteration below the Gershgorin bound with
/// Rayleigh-Ritz; residuals are driven below `1e-10 ||H||`.
///
/// The shift sits just below the lower Gershgorin bound, at a distance set
/// by the wanted window `[lo, up_to]` rather than the full spectral width:
/// on fine grids the width grows like `h^-2` and a shift that far down
/// makes the iteration crawl.
pub fn lowest_eigenpairs_through(h: &Csr, up_to: f64, extra: usize, seed: u64) -> Result<(Vec<f64>, Mat<c64>)> {
    let n = h.nrows;
    let (lo, hi) = h.gershgorin_bounds();
    let norm = lo.abs().max(hi.abs()).max(1e-300);
    let sigma = lo - 0.1 * (up_to - lo).abs().max(1e-6 * norm);
    let lu = ShiftedLu::sparse(h, c64::new(sigma, 0.0))?;
    let tol = 1e-10 * norm;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut want = (extra + 12).min(n);
    loop {
        let p = (want + want / 2 + 8).min(n);
        let mut q = Mat::from_fn(n, p, |_, _| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        orthonormalize(&mut q);
        let mut converged = None;
        for _ in 0..2000 {
            let mut y = lu.solve(q.as_ref());
            orthonormalize(&mut y);
            let hy = h.mul_dense(y.as_ref());
            let t = y.adjoint() * &hy;
            let t = Mat::from_fn(p, p, |i, j| (t[(i, j)] + t[(j, i)].conj()) * 0.5);
            let (theta, s) = linalg::hermitian_eigen(t.as_ref())?;
            let x = &y * &s;
            let hx = &hy * &s;
            let k = want.min(p);
            let ok = (0..k).all(|c| {
                let r: f64 = (0..n).map(|i| (hx[(i, c)] - x[(i, c)] * theta[c]).norm_sqr()).sum();
                r.sqrt() <= tol
            });
            q = x;
            if ok {
                converged = Some((theta[..k].to_vec(), q.subcols(0, k).to_owned()));
                break;
            }
        }
        let (vals, vecs) = converged.ok_or_else(|| Error::Solver("shift-invert iteration did not converge".into()))?;
        let above = vals.iter().filter(|&&v| v > up_to).count();
        if above >= extra.min(n) || vals.len() == n {
            // keep everything up to `extra` levels above the target
            let keep = vals.iter().take_while(|&&v| v <= up_to).count() + above.min(extra);
            return Ok((vals[..keep].to_vec(), vecs.subcols(0, keep).to_owned()));
        }
        want = (2 * want).min(n);
    }
}

/// Dense symmetric projector `V V^dagger` of a frame.
pub fn frame_projector(v: MatRef<'_, c64>) -> Mat<c64> {
    if v.ncols() == 0 {
        return Mat::from_fn(v.nrows(), v.nrows(), |_, _| ZERO);
    }
    v * v.adjoint()
}

/// Block norm estimate used for relative residual thresholds.
pub fn operator_norm_estimate(h: &OperatorMatrix) -> f64 {
    h.blocks().iter().map(norm_estimate).fold(0.0, f64::max)
}
