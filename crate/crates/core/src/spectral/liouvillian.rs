//! Off-diagonal inverse of the Liouvillian `C -> [H, C]` and the
//! double-commutator contour identity. Everything here is dense and meant
//! for verification-sized instances; the matrix-level functions act on one
//! Hermitian block, the operator-level ones on both spin blocks.

use std::f64::consts::PI;

use faer::{c64, Mat, MatRef};

use super::contour::{riesz_factor, Contour};
use super::eigen::Spectrum;
use crate::error::{Error, Result};
use crate::linalg::{self, ShiftedLu, I};
use crate::model::{Block, OperatorMatrix, Spin};

/// `R X R` for `R = (H - w)^{-1}`, via two factorized solves.
fn sandwich(lu: &ShiftedLu, x: MatRef<'_, c64>) -> Mat<c64> {
    let rx = lu.solve(x);
    // (R X) R = (R^dagger (R X)^dagger)^dagger
    let t = lu.solve_adjoint(rx.adjoint().to_owned().as_ref());
    t.adjoint().to_owned()
}

/// Riesz projection `(i / 2 pi) oint (H - w)^{-1} dw` of a dense matrix.
pub fn riesz_matrix(h: MatRef<'_, c64>, contour: &Contour) -> Result<Mat<c64>> {
    let n = h.nrows();
    let eye = linalg::identity(n);
    let sum = contour.integrate(n, n, |w| Ok(ShiftedLu::dense(h, w).solve(eye.as_ref())))?;
    Ok(sum * faer::Scale(riesz_factor()))
}

/// `Pi A Pi^perp + Pi^perp A Pi` for dense matrices.
pub fn offdiagonal_matrix(a: MatRef<'_, c64>, p: MatRef<'_, c64>) -> Mat<c64> {
    let q = linalg::identity(p.nrows()) - p;
    p * a * &q + &q * a * p
}

/// `C = I(A^OD) = (i / 2 pi) oint R_w A^OD R_w dw` for one dense block; `Pi`
/// is the Riesz projection of the same contour.
pub fn liouvillian_solve_matrix(h: MatRef<'_, c64>, contour: &Contour, a: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let n = h.nrows();
    let p = riesz_matrix(h, contour)?;
    let aod = offdiagonal_matrix(a, p.as_ref());
    let sum = contour.integrate(n, n, |w| Ok(sandwich(&ShiftedLu::dense(h, w), aod.as_ref())))?;
    Ok(sum * faer::Scale(riesz_factor()))
}

/// Eigenbasis solution `C_nm = [A, Pi]_nm / (lambda_n - lambda_m)` between
/// occupied and empty states, zero elsewhere.
pub fn liouvillian_spectral_matrix(eigenvalues: &[f64], eigenvectors: MatRef<'_, c64>, fermi: f64, a: MatRef<'_, c64>) -> Mat<c64> {
    let v = eigenvectors;
    let at = v.adjoint() * a * v;
    let f = |k: usize| if eigenvalues[k] < fermi { 1.0 } else { 0.0 };
    let n = eigenvalues.len();
    let ct = Mat::from_fn(n, n, |i, j| {
        if f(i) == f(j) {
            return c64::new(0.0, 0.0);
        }
        // [A, Pi]_ij = A_ij (f_j - f_i)
        at[(i, j)] * (f(j) - f(i)) / (eigenvalues[i] - eigenvalues[j])
    });
    v * ct * v.adjoint()
}

/// `T = (1 / 2 pi) oint { R B1 R B2 R - R B2 R B1 R } dw` with
/// `B_j = i [H, A_j]`. It satisfies
/// `-i [[Pi, A1], [Pi, A2]] = Pi T Pi - Pi^perp T Pi^perp`.
pub fn double_commutator_matrix(h: MatRef<'_, c64>, contour: &Contour, a1: MatRef<'_, c64>, a2: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let n = h.nrows();
    let m1 = linalg::commutator(h, a1) * faer::Scale(I);
    let m2 = linalg::commutator(h, a2) * faer::Scale(I);
    let eye = linalg::identity(n);
    let sum = contour.integrate(n, n, |w| {
        let r = ShiftedLu::dense(h, w).solve(eye.as_ref());
        let r1 = &r * &m1;
        let r2 = &r * &m2;
        Ok((&r1 * &r2 - &r2 * &r1) * &r)
    })?;
    Ok(sum * faer::Scale(c64::new(0.5 / PI, 0.0)))
}

fn per_block(like: &OperatorMatrix, f: impl Fn(Spin) -> Result<Mat<c64>>) -> Result<OperatorMatrix> {
    let up = f(Spin::Up)?;
    let down = f(Spin::Down)?;
    OperatorMatrix::new(like.geometry().clone(), Block::Dense(up), Block::Dense(down))
}

/// Operator version of [`liouvillian_solve_matrix`].
pub fn liouvillian_solve(h: &OperatorMatrix, contour: &Contour, a: &OperatorMatrix) -> Result<OperatorMatrix> {
    per_block(h, |s| liouvillian_solve_matrix(h.block(s).to_dense().as_ref(), contour, a.block(s).to_dense().as_ref()))
}

/// Operator version of [`liouvillian_spectral_matrix`].
pub fn liouvillian_spectral(spectrum: &Spectrum, fermi: f64, a: &OperatorMatrix) -> Result<OperatorMatrix> {
    if !spectrum.is_complete() {
        return Err(Error::IncompleteSpectrum("spectral-basis Liouvillian inverse".into()));
    }
    per_block(a, |s| {
        let b = spectrum.block(s);
        Ok(liouvillian_spectral_matrix(&b.eigenvalues, b.eigenvectors.as_ref(), fermi, a.block(s).to_dense().as_ref()))
    })
}

/// Operator version of [`double_commutator_matrix`].
pub fn double_commutator_t(h: &OperatorMatrix, contour: &Contour, a1: &OperatorMatrix, a2: &OperatorMatrix) -> Result<OperatorMatrix> {
    per_block(h, |s| {
        double_commutator_matrix(
            h.block(s).to_dense().as_ref(),
            contour,
            a1.block(s).to_dense().as_ref(),
            a2.block(s).to_dense().as_ref(),
        )
    })
}
