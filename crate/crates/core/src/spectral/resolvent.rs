use faer::{c64, Mat, MatRef};

use super::eigen::Spectrum;
use crate::error::{Error, Result};
use crate::linalg::ShiftedLu;
use crate::model::{Block, OperatorMatrix, Spin};

/// LU factors of `B - w`, sparse when the block is sparse.
pub fn factorize(block: &Block, w: c64) -> Result<ShiftedLu> {
    match block {
        Block::Sparse(m) => ShiftedLu::sparse(m, w),
        Block::Dense(m) => Ok(ShiftedLu::dense(m.as_ref(), w)),
    }
}

/// Factorized resolvent `R_w = (H - w)^{-1}` of both spin blocks.
pub struct Resolvent {
    pub w: c64,
    lus: [ShiftedLu; 2],
}

impl Resolvent {
    pub fn new(h: &OperatorMatrix, w: c64) -> Result<Self> {
        Ok(Resolvent { w, lus: [factorize(h.block(Spin::Up), w)?, factorize(h.block(Spin::Down), w)?] })
    }

    /// `R_w rhs` in one spin block.
    pub fn apply(&self, spin: Spin, rhs: MatRef<'_, c64>) -> Mat<c64> {
        self.lus[spin.index()].solve(rhs)
    }

    /// `R_w^dagger rhs = R_{conj w} rhs` in one spin block.
    pub fn apply_adjoint(&self, spin: Spin, rhs: MatRef<'_, c64>) -> Mat<c64> {
        self.lus[spin.index()].solve_adjoint(rhs)
    }
}

/// `(H - w)^{-1} A`, computed by linear solves against the columns of `A`.
/// Refuses `w` within `1e-8` of a computed eigenvalue.
pub fn resolvent_apply(h: &OperatorMatrix, spectrum: &Spectrum, w: c64, a: &OperatorMatrix) -> Result<OperatorMatrix> {
    let distance = spectrum
        .eigenvalues()
        .iter()
        .map(|&l| (w - c64::new(l, 0.0)).norm())
        .fold(f64::INFINITY, f64::min);
    if distance < 1e-8 {
        return Err(Error::SingularResolvent { w, distance });
    }
    let r = Resolvent::new(h, w)?;
    let blocks = Spin::BOTH.map(|s| Block::Dense(r.apply(s, a.block(s).to_dense().as_ref())));
    let [up, down] = blocks;
    OperatorMatrix::new(h.geometry().clone(), up, down)
}
