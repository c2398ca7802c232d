//! Small dense/sparse helpers shared by the pipeline stages.

use faer::linalg::solvers::PartialPivLu;
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

/// Compressed sparse row matrix with complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<c64>,
}

impl Csr {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// entries that cancel exactly are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, c64)>) -> Self {
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(trip.len());
        let mut values: Vec<c64> = Vec::with_capacity(trip.len());
        let mut rows = Vec::with_capacity(trip.len());
        for (r, c, v) in trip {
            assert!(r < nrows && c < ncols, "triplet out of bounds");
            if let (Some(&lr), Some(&lc)) = (rows.last(), col_idx.last()) {
                if lr == r && lc == c {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            col_idx.push(c);
            values.push(v);
        }
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_cols = Vec::with_capacity(rows.len());
        let mut keep_vals = Vec::with_capacity(rows.len());
        for ((r, c), v) in rows.into_iter().zip(col_idx).zip(values) {
            if v != ZERO {
                keep_rows.push(r);
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for &r in &keep_rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr { nrows, ncols, row_ptr, col_idx: keep_cols, values: keep_vals }
    }

    pub fn identity(n: usize) -> Self {
        Csr {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![ONE; n],
        }
    }

    pub fn diagonal(diag: &[c64]) -> Self {
        Csr::from_triplets(
            diag.len(),
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect(),
        )
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, c64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, c64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.row(i).find(|&(c, _)| c == j).map(|(_, v)| v).unwrap_or(ZERO)
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn from_dense(m: MatRef<'_, c64>) -> Self {
        let mut trip = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v != ZERO {
                    trip.push((i, j, v));
                }
            }
        }
        Csr::from_triplets(m.nrows(), m.ncols(), trip)
    }

    pub fn adjoint(&self) -> Self {
        Csr::from_triplets(self.ncols, self.nrows, self.triplets().map(|(i, j, v)| (j, i, v.conj())).collect())
    }

    pub fn scale(&self, s: c64) -> Self {
        Csr { values: self.values.iter().map(|&v| v * s).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &Csr) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Csr::from_triplets(self.nrows, self.ncols, self.triplets().chain(other.triplets()).collect())
    }

    /// `self * rhs` for a dense right-hand side.
    pub fn mul_dense(&self, rhs: MatRef<'_, c64>) -> Mat<c64> {
        assert_eq!(self.ncols, rhs.nrows());
        let mut out = Mat::zeros(self.nrows, rhs.ncols());
        for k in 0..rhs.ncols() {
            for i in 0..self.nrows {
                let mut acc = ZERO;
                for (j, v) in self.row(i) {
                    acc += v * rhs[(j, k)];
                }
                out[(i, k)] = acc;
            }
        }
        out
    }

    pub fn mul_csr(&self, rhs: &Csr) -> Csr {
        assert_eq!(self.ncols, rhs.nrows);
        let mut trip = Vec::new();
        for i in 0..self.nrows {
            for (k, a) in self.row(i) {
                for (j, b) in rhs.row(k) {
                    trip.push((i, j, a * b));
                }
            }
        }
        Csr::from_triplets(self.nrows, rhs.ncols, trip)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the spectrum of a Hermitian matrix.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.nrows {
            let mut d = 0.0;
            let mut r = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    d = v.re;
                } else {
                    r += v.norm();
                }
            }
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        if self.nrows == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    fn to_faer_shifted(&self, w: c64) -> Result<SparseColMat<usize, c64>> {
        let mut trip: Vec<Triplet<usize, usize, c64>> =
            self.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        for i in 0..self.nrows {
            trip.push(Triplet::new(i, i, -w));
        }
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trip)
            .map_err(|e| Error::Solver(format!("sparse assembly failed: {e:?}")))
    }
}

/// LU factorization of `A - w` for a square matrix `A`.
pub enum ShiftedLu {
    Sparse(faer::sparse::linalg::solvers::Lu<usize, c64>),
    Dense(PartialPivLu<c64>),
}

impl ShiftedLu {
    pub fn sparse(a: &Csr, w: c64) -> Result<Self> {
        let m = a.to_faer_shifted(w)?;
        let lu = m.sp_lu().map_err(|e| Error::Solver(format!("sparse LU failed: {e:?}")))?;
        Ok(ShiftedLu::Sparse(lu))
    }

    pub fn dense(a: MatRef<'_, c64>, w: c64) -> Self {
        let mut m = a.to_owned();
        for i in 0..m.nrows() {
            m[(i, i)] -= w;
        }
        ShiftedLu::Dense(m.partial_piv_lu())
    }

    /// `(A - w)^{-1} rhs`.
    pub fn solve(&self, rhs: MatRef<'_, c64>) -> Mat<c64> {
        let mut x = rhs.to_owned();
        match self {
            ShiftedLu::Sparse(lu) => lu.solve_in_place(x.as_mut()),
            ShiftedLu::Dense(lu) => lu.solve_in_place(x.as_mut()),
        }
        x
    }

    /// `(A - w)^{-†} rhs`.
    pub fn solve_adjoint(&self, rhs: MatRef<'_, c64>) -> Mat<c64> {
        let mut x = rhs.to_owned();
        match self {
            ShiftedLu::Sparse(lu) => lu.solve_adjoint_in_place(x.as_mut()),
            ShiftedLu::Dense(lu) => lu.solve_adjoint_in_place(x.as_mut()),
        }
        x
    }
}

pub fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

pub fn frobenius(m: MatRef<'_, c64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// `max |A - A^†| / max |A|` (0 for the zero matrix).
pub fn hermiticity_residual(m: MatRef<'_, c64>) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows() - 1) {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

pub fn commutator(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    a * b - b * a
}

pub fn identity(n: usize) -> Mat<c64> {
    Mat::identity(n, n)
}

pub fn trace(m: MatRef<'_, c64>) -> c64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Columns of the identity selected by `idx`.
pub fn unit_columns(n: usize, idx: &[usize]) -> Mat<c64> {
    let mut m = Mat::zeros(n, idx.len());
    for (k, &i) in idx.iter().enumerate() {
        m[(i, k)] = ONE;
    }
    m
}

/// Left-multiplies by a real diagonal matrix.
pub fn scale_rows(d: &[f64], m: MatRef<'_, c64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * d[i])
}

/// `sum_i conj(a_ik) b_ik` for each column k.
pub fn column_dots(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Vec<c64> {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    (0..a.ncols())
        .map(|k| (0..a.nrows()).map(|i| a[(i, k)].conj() * b[(i, k)]).sum())
        .collect()
}

/// Dense Hermitian eigendecomposition with ascending eigenvalues.
pub fn hermitian_eigen(m: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let eig = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Solver(format!("dense eigensolver failed: {e:?}")))?;
    let s = eig.S().column_vector();
    let vals: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let vecs = eig.U().to_owned();
    // faer returns ascending values already; keep a stable sort as a guard.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return Ok((vals, vecs));
    }
    let sorted_vals = order.iter().map(|&o| vals[o]).collect();
    let sorted_vecs = Mat::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    Ok((sorted_vals, sorted_vecs))
}
