use std::sync::Arc;

use faer::{c64, Mat, MatRef};

use super::geometry::{Geometry, Spin};
use crate::error::{Error, Result};
use crate::linalg::{self, Csr, ZERO};

/// One spin sector of an operator.
#[derive(Debug, Clone)]
pub enum Block {
    Sparse(Csr),
    Dense(Mat<c64>),
}

impl Block {
    pub fn dim(&self) -> usize {
        match self {
            Block::Sparse(m) => m.nrows,
            Block::Dense(m) => m.nrows(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        match self {
            Block::Sparse(m) => m.get(i, j),
            Block::Dense(m) => m[(i, j)],
        }
    }

    pub fn to_dense(&self) -> Mat<c64> {
        match self {
            Block::Sparse(m) => m.to_dense(),
            Block::Dense(m) => m.clone(),
        }
    }

    pub fn as_sparse(&self) -> Option<&Csr> {
        match self {
            Block::Sparse(m) => Some(m),
            Block::Dense(_) => None,
        }
    }

    pub fn mul_dense(&self, rhs: MatRef<'_, c64>) -> Mat<c64> {
        match self {
            Block::Sparse(m) => m.mul_dense(rhs),
            Block::Dense(m) => m * rhs,
        }
    }

    pub fn mul(&self, rhs: &Block) -> Block {
        match (self, rhs) {
            (Block::Sparse(a), Block::Sparse(b)) => Block::Sparse(a.mul_csr(b)),
            (a, Block::Sparse(b)) => Block::Dense(b.adjoint().mul_dense(a.to_dense().adjoint().to_owned().as_ref()).adjoint().to_owned()),
            (a, Block::Dense(b)) => Block::Dense(a.mul_dense(b.as_ref())),
        }
    }

    pub fn add(&self, rhs: &Block) -> Block {
        match (self, rhs) {
            (Block::Sparse(a), Block::Sparse(b)) => Block::Sparse(a.add(b)),
            (a, b) => Block::Dense(a.to_dense() + b.to_dense()),
        }
    }

    pub fn scale(&self, s: c64) -> Block {
        match self {
            Block::Sparse(a) => Block::Sparse(a.scale(s)),
            Block::Dense(a) => Block::Dense(Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)),
        }
    }

    pub fn adjoint(&self) -> Block {
        match self {
            Block::Sparse(a) => Block::Sparse(a.adjoint()),
            Block::Dense(a) => Block::Dense(a.adjoint().to_owned()),
        }
    }

    pub fn conj(&self) -> Block {
        match self {
            Block::Sparse(a) => Block::Sparse(Csr { values: a.values.iter().map(|v| v.conj()).collect(), ..a.clone() }),
            Block::Dense(a) => Block::Dense(Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].conj())),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Block::Sparse(a) => a.max_abs(),
            Block::Dense(a) => linalg::max_abs(a.as_ref()),
        }
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn antihermitian_max(&self) -> f64 {
        match self {
            Block::Sparse(a) => a.triplets().map(|(i, j, v)| (v - a.get(j, i).conj()).norm()).fold(0.0, f64::max),
            Block::Dense(a) => {
                let mut w = 0.0f64;
                for j in 0..a.ncols() {
                    for i in 0..a.nrows() {
                        w = w.max((a[(i, j)] - a[(j, i)].conj()).norm());
                    }
                }
                w
            }
        }
    }

    /// Nonzero entries `(i, j, value)`; dense blocks report every entry.
    pub fn entries(&self) -> Vec<(usize, usize, c64)> {
        match self {
            Block::Sparse(a) => a.triplets().collect(),
            Block::Dense(a) => {
                let mut out = Vec::with_capacity(a.nrows() * a.ncols());
                for j in 0..a.ncols() {
                    for i in 0..a.nrows() {
                        out.push((i, j, a[(i, j)]));
                    }
                }
                out
            }
        }
    }
}

/// Operator on the spinful lattice space. Spin conservation is structural:
/// only the two diagonal spin blocks are stored, so the `(up, down)` and
/// `(down, up)` entries are exactly zero. The full-space index of
/// `(site, spin)` is `spin.index() * nsites + site`.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    geometry: Arc<Geometry>,
    blocks: [Block; 2],
}

impl OperatorMatrix {
    pub fn new(geometry: Arc<Geometry>, up: Block, down: Block) -> Result<Self> {
        let n = geometry.nsites();
        if up.dim() != n || down.dim() != n {
            return Err(Error::Shape(format!(
                "blocks of size {} / {} on a geometry with {} sites",
                up.dim(),
                down.dim(),
                n
            )));
        }
        Ok(OperatorMatrix { geometry, blocks: [up, down] })
    }

    /// Splits a full `2N x 2N` matrix into spin blocks, refusing matrices with
    /// nonzero spin-flip entries.
    pub fn from_full(geometry: Arc<Geometry>, full: MatRef<'_, c64>) -> Result<Self> {
        let n = geometry.nsites();
        if full.nrows() != 2 * n || full.ncols() != 2 * n {
            return Err(Error::Shape(format!("expected {}x{}, got {}x{}", 2 * n, 2 * n, full.nrows(), full.ncols())));
        }
        let off = linalg::max_abs(full.submatrix(0, n, n, n)).max(linalg::max_abs(full.submatrix(n, 0, n, n)));
        if off > 0.0 {
            return Err(Error::SpinNotConserved { residual: off });
        }
        let up = Block::Dense(full.submatrix(0, 0, n, n).to_owned());
        let down = Block::Dense(full.submatrix(n, n, n, n).to_owned());
        OperatorMatrix::new(geometry, up, down)
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geometry
    }

    pub fn block(&self, spin: Spin) -> &Block {
        &self.blocks[spin.index()]
    }

    pub fn blocks(&self) -> &[Block; 2] {
        &self.blocks
    }

    pub fn dimension(&self) -> usize {
        2 * self.geometry.nsites()
    }

    pub fn kernel_scale(&self) -> f64 {
        self.geometry.kernel_scale
    }

    /// Integral-kernel value `A(x, s; y, s')`.
    pub fn kernel(&self, x: usize, s: Spin, y: usize, s2: Spin) -> c64 {
        if s != s2 {
            return ZERO;
        }
        self.block(s).get(x, y) / self.geometry.kernel_scale
    }

    pub fn to_full_dense(&self) -> Mat<c64> {
        let n = self.geometry.nsites();
        let mut m = Mat::zeros(2 * n, 2 * n);
        for s in Spin::BOTH {
            let o = s.index() * n;
            for (i, j, v) in self.block(s).entries() {
                m[(o + i, o + j)] = v;
            }
        }
        m
    }

    /// `max |A - A^dagger| / max |A|` over both blocks.
    pub fn hermiticity_residual(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        self.blocks.iter().map(Block::antihermitian_max).fold(0.0, f64::max) / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(Block::max_abs).fold(0.0, f64::max)
    }

    pub fn map_blocks(&self, f: impl Fn(Spin, &Block) -> Block) -> OperatorMatrix {
        OperatorMatrix { geometry: self.geometry.clone(), blocks: [f(Spin::Up, &self.blocks[0]), f(Spin::Down, &self.blocks[1])] }
    }

    fn check_same(&self, other: &OperatorMatrix) -> Result<()> {
        if *self.geometry != *other.geometry {
            return Err(Error::GeometryMismatch("operators live on different geometries".into()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check_same(other)?;
        Ok(self.map_blocks(|s, b| b.mul(other.block(s))))
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check_same(other)?;
        Ok(self.map_blocks(|s, b| b.add(other.block(s))))
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check_same(other)?;
        Ok(self.map_blocks(|s, b| b.add(&other.block(s).scale(c64::new(-1.0, 0.0)))))
    }

    pub fn scale(&self, s: c64) -> OperatorMatrix {
        self.map_blocks(|_, b| b.scale(s))
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        self.map_blocks(|_, b| b.adjoint())
    }

    pub fn commutator(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Identity operator on the geometry.
    pub fn identity(geometry: Arc<Geometry>) -> OperatorMatrix {
        let n = geometry.nsites();
        OperatorMatrix { geometry, blocks: [Block::Sparse(Csr::identity(n)), Block::Sparse(Csr::identity(n))] }
    }
}
