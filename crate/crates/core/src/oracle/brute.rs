//! Operator identities behind the spin Středa formula, checked on small
//! random gapped Hermitian matrices by dense linear algebra.
//!
//! (a) `C = I(A^OD)` solves `[H, C] = [A, Pi]` and is off-diagonal;
//! (b) it agrees with the eigenbasis solution (uniqueness);
//! (c) `-i [[Pi, A1], [Pi, A2]] = Pi T Pi - Pi^perp T Pi^perp` with `T` the
//!     contour integral of `R B1 R B2 R - R B2 R B1 R`, `B_j = i[H, A_j]`;
//! (d) `Tr Pi [[Pi, D1], [Pi, D2]] Pi = 0` for commuting `D1`, `D2`.
//!
//! (d) needs commuting operators (in the Chern marker they are the two
//! position operators), so it uses random real diagonal matrices; (a)-(c)
//! use random Hermitian ones.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};
use crate::spectral::contour::contour_for_gap;
use crate::spectral::detect_gap_values;
use crate::spectral::liouvillian::{
    double_commutator_matrix, liouvillian_solve_matrix, liouvillian_spectral_matrix, riesz_matrix,
};

pub const MAX_BRUTE_DIM: usize = 200;
const MAX_RETRIES: u64 = 16;
/// Half-width of the enforced gap around zero.
const HALF_GAP: f64 = 0.25;
pub const BRUTE_NODES: usize = 128;

/// A gapped Hermitian matrix with its Fermi level and test operators.
#[derive(Debug, Clone)]
pub struct BruteInstance {
    pub h: Mat<c64>,
    pub fermi: f64,
    pub a1: Mat<c64>,
    pub a2: Mat<c64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// Seed that produced the instance after retries.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForceReport {
    pub dim: usize,
    pub seed: u64,
    pub gap: (f64, f64),
    /// `||[H, C] - [A, Pi]||` plus the diagonal blocks of `C`.
    pub liouvillian: f64,
    /// `||C_contour - C_eigenbasis||`.
    pub uniqueness: f64,
    /// `||-i [[Pi, A1], [Pi, A2]] - (Pi T Pi - Pi^perp T Pi^perp)||`.
    pub double_commutator: f64,
    /// `|Tr Pi [[Pi, D1], [Pi, D2]] Pi|`.
    pub global_trace: f64,
}

impl BruteForceReport {
    pub fn max_residual(&self) -> f64 {
        self.liouvillian.max(self.uniqueness).max(self.double_commutator).max(self.global_trace)
    }
}

fn uniform_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Mat<c64> {
    let mut m = Mat::<c64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = c64::new(rng.random_range(-1.0..1.0), 0.0);
        for i in 0..j {
            let z = c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

fn diag(d: &[f64]) -> Mat<c64> {
    Mat::from_fn(d.len(), d.len(), |i, j| if i == j { c64::new(d[i], 0.0) } else { ZERO })
}

/// Random instance: eigenvalues uniform on `[-2, 2]` pushed `0.25` away from
/// `E_F = 0`, eigenvectors from a random Hermitian matrix. Draws where one
/// side of the gap is empty are retried with the next seed.
pub fn random_instance(dim: usize, seed: u64) -> Result<BruteInstance> {
    if !(2..=MAX_BRUTE_DIM).contains(&dim) {
        return Err(Error::InvalidSpec { field: "dim", reason: format!("must lie in 2..={MAX_BRUTE_DIM}, got {dim}") });
    }
    for attempt in 0..MAX_RETRIES {
        let s = seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let vals: Vec<f64> = (0..dim)
            .map(|_| {
                let x: f64 = rng.random_range(-2.0..2.0);
                x + HALF_GAP * x.signum()
            })
            .collect();
        let below = vals.iter().filter(|&&v| v < 0.0).count();
        if below == 0 || below == dim {
            continue;
        }
        let (_, u) = linalg::hermitian_eigen(uniform_hermitian(&mut rng, dim).as_ref())?;
        let h = &u * diag(&vals) * u.adjoint();
        let h = Mat::from_fn(dim, dim, |i, j| 0.5 * (h[(i, j)] + h[(j, i)].conj()));
        let scale = 1.0 / (dim as f64).sqrt();
        let a1 = uniform_hermitian(&mut rng, dim) * faer::Scale(c64::new(scale, 0.0));
        let a2 = uniform_hermitian(&mut rng, dim) * faer::Scale(c64::new(scale, 0.0));
        let d1 = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d2 = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        return Ok(BruteInstance { h, fermi: 0.0, a1, a2, d1, d2, seed: s });
    }
    Err(Error::DegenerateGap(format!("no gapped instance after {MAX_RETRIES} seeds starting at {seed}")))
}

/// Runs checks (a)-(d) on one instance.
pub fn check_instance(inst: &BruteInstance, nodes: usize) -> Result<BruteForceReport> {
    let n = inst.h.nrows();
    let (vals, vecs) = linalg::hermitian_eigen(inst.h.as_ref())?;
    let gap = detect_gap_values(&vals, inst.fermi)?;
    let contour = contour_for_gap(&gap, vals[0], nodes)?;
    let h = inst.h.as_ref();
    let pi = riesz_matrix(h, &contour)?;
    let q = linalg::identity(n) - &pi;

    // (a)
    let c = liouvillian_solve_matrix(h, &contour, inst.a1.as_ref())?;
    let lhs = linalg::commutator(h, c.as_ref());
    let rhs = linalg::commutator(inst.a1.as_ref(), pi.as_ref());
    let diag_blocks = &pi * &c * &pi + &q * &c * &q;
    let liouvillian = linalg::frobenius((lhs - rhs).as_ref()).max(linalg::frobenius(diag_blocks.as_ref()));

    // (b)
    let spectral = liouvillian_spectral_matrix(&vals, vecs.as_ref(), inst.fermi, inst.a1.as_ref());
    let uniqueness = linalg::frobenius((&c - &spectral).as_ref());

    // (c)
    let t = double_commutator_matrix(h, &contour, inst.a1.as_ref(), inst.a2.as_ref())?;
    let k1 = linalg::commutator(pi.as_ref(), inst.a1.as_ref());
    let k2 = linalg::commutator(pi.as_ref(), inst.a2.as_ref());
    let dc = linalg::commutator(k1.as_ref(), k2.as_ref()) * faer::Scale(c64::new(0.0, -1.0));
    let sandwich = &pi * &t * &pi - &q * &t * &q;
    let double_commutator = linalg::frobenius((dc - sandwich).as_ref());

    // (d)
    let (m1, m2) = (diag(&inst.d1), diag(&inst.d2));
    let j1 = linalg::commutator(pi.as_ref(), m1.as_ref());
    let j2 = linalg::commutator(pi.as_ref(), m2.as_ref());
    let inner = &pi * linalg::commutator(j1.as_ref(), j2.as_ref()) * &pi;
    let global_trace = linalg::trace(inner.as_ref()).norm();

    Ok(BruteForceReport {
        dim: n,
        seed: inst.seed,
        gap: (gap.gap_lower, gap.gap_upper),
        liouvillian,
        uniqueness,
        double_commutator,
        global_trace,
    })
}

/// Random gapped instance of size `dim` from `seed`, checked at 128 nodes.
pub fn brute_force_identities(dim: usize, seed: u64) -> Result<BruteForceReport> {
    check_instance(&random_instance(dim, seed)?, BRUTE_NODES)
}
