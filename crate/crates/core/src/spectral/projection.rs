use std::sync::Arc;

use faer::{c64, Mat, MatRef};

use super::contour::{riesz_factor, Contour};
use super::eigen::Spectrum;
use super::gap::GapInfo;
use super::resolvent::factorize;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{Block, Geometry, OperatorMatrix, Spin};

/// One spin block of a projection: either an orthonormal frame `V` with
/// `Pi = V V^dagger`, or an explicit matrix.
#[derive(Debug, Clone)]
pub enum ProjBlock {
    Frame(Mat<c64>),
    Matrix(Mat<c64>),
}

/// Orthogonal projection commuting with `S^z`.
#[derive(Debug, Clone)]
pub struct Projection {
    geometry: Arc<Geometry>,
    blocks: [ProjBlock; 2],
}

impl Projection {
    pub fn new(geometry: Arc<Geometry>, up: ProjBlock, down: ProjBlock) -> Result<Self> {
        let n = geometry.nsites();
        for b in [&up, &down] {
            let rows = match b {
                ProjBlock::Frame(v) => v.nrows(),
                ProjBlock::Matrix(m) => {
                    if m.ncols() != m.nrows() {
                        return Err(Error::Shape("projection matrix must be square".into()));
                    }
                    m.nrows()
                }
            };
            if rows != n {
                return Err(Error::Shape(format!("projection block has {rows} rows, geometry has {n} sites")));
            }
        }
        Ok(Projection { geometry, blocks: [up, down] })
    }

    pub fn from_operator(op: &OperatorMatrix) -> Self {
        let [up, down] = Spin::BOTH.map(|s| ProjBlock::Matrix(op.block(s).to_dense()));
        Projection { geometry: op.geometry().clone(), blocks: [up, down] }
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geometry
    }

    pub fn block(&self, spin: Spin) -> &ProjBlock {
        &self.blocks[spin.index()]
    }

    pub fn frame(&self, spin: Spin) -> Option<&Mat<c64>> {
        match self.block(spin) {
            ProjBlock::Frame(v) => Some(v),
            ProjBlock::Matrix(_) => None,
        }
    }

    /// `Pi rhs` in one spin block.
    pub fn apply(&self, spin: Spin, rhs: MatRef<'_, c64>) -> Mat<c64> {
        match self.block(spin) {
            ProjBlock::Frame(v) => {
                if v.ncols() == 0 {
                    return Mat::zeros(rhs.nrows(), rhs.ncols());
                }
                let c = v.adjoint() * rhs;
                v * c
            }
            ProjBlock::Matrix(m) => m * rhs,
        }
    }

    /// Dense matrix of one spin block.
    pub fn matrix(&self, spin: Spin) -> Mat<c64> {
        match self.block(spin) {
            ProjBlock::Frame(v) => super::eigen::frame_projector(v.as_ref()),
            ProjBlock::Matrix(m) => m.clone(),
        }
    }

    pub fn to_operator(&self) -> OperatorMatrix {
        let [up, down] = Spin::BOTH.map(|s| Block::Dense(self.matrix(s)));
        OperatorMatrix::new(self.geometry.clone(), up, down).expect("validated shapes")
    }

    /// `tr Pi` in one spin block.
    pub fn rank(&self, spin: Spin) -> f64 {
        match self.block(spin) {
            ProjBlock::Frame(v) => linalg::frobenius(v.as_ref()).powi(2),
            ProjBlock::Matrix(m) => linalg::trace(m.as_ref()).re,
        }
    }

    /// Frobenius norm of `Pi^2 - Pi`, maximized over spin blocks.
    pub fn idempotency_residual(&self) -> f64 {
        Spin::BOTH
            .iter()
            .map(|&s| match self.block(s) {
                // V (V^dagger V - 1) V^dagger
                ProjBlock::Frame(v) => {
                    let g = v.adjoint() * v;
                    let d = &g - linalg::identity(v.ncols());
                    linalg::frobenius((v * &d * v.adjoint()).as_ref())
                }
                ProjBlock::Matrix(m) => linalg::frobenius((m * m - m).as_ref()),
            })
            .fold(0.0, f64::max)
    }

    /// Frobenius distance to another projection, maximized over spin blocks.
    pub fn distance(&self, other: &Projection) -> f64 {
        Spin::BOTH
            .iter()
            .map(|&s| linalg::frobenius((self.matrix(s) - other.matrix(s)).as_ref()))
            .fold(0.0, f64::max)
    }

    /// Spin-resolved parts `(Pi^up, Pi^down)`, each supported on one block.
    pub fn spin_decompose(&self) -> (Projection, Projection) {
        let n = self.geometry.nsites();
        let zero = || ProjBlock::Frame(Mat::zeros(n, 0));
        let up = Projection { geometry: self.geometry.clone(), blocks: [self.blocks[0].clone(), zero()] };
        let down = Projection { geometry: self.geometry.clone(), blocks: [zero(), self.blocks[1].clone()] };
        (up, down)
    }

    /// Time reversal `Theta Pi Theta^{-1}`: complex conjugation combined with
    /// the exchange of the spin blocks.
    pub fn time_reversed(&self) -> Projection {
        let conj = |b: &ProjBlock| match b {
            ProjBlock::Frame(v) => ProjBlock::Frame(Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)].conj())),
            ProjBlock::Matrix(m) => ProjBlock::Matrix(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].conj())),
        };
        Projection { geometry: self.geometry.clone(), blocks: [conj(&self.blocks[1]), conj(&self.blocks[0])] }
    }
}

/// Anything that can apply a spin-block projection to a set of columns:
/// stored projections, or Riesz integrals evaluated on demand.
pub trait ProjectorAction: Sync {
    fn geometry(&self) -> &Arc<Geometry>;
    fn apply_block(&self, spin: Spin, rhs: MatRef<'_, c64>) -> Result<Mat<c64>>;
}

impl ProjectorAction for Projection {
    fn geometry(&self) -> &Arc<Geometry> {
        &self.geometry
    }

    fn apply_block(&self, spin: Spin, rhs: MatRef<'_, c64>) -> Result<Mat<c64>> {
        Ok(self.apply(spin, rhs))
    }
}

/// The Riesz projection of `h` over `contour`, applied column-wise by
/// factorized solves without ever forming a dense matrix.
pub struct RieszProjector<'a> {
    pub h: &'a OperatorMatrix,
    pub contour: &'a Contour,
}

impl ProjectorAction for RieszProjector<'_> {
    fn geometry(&self) -> &Arc<Geometry> {
        self.h.geometry()
    }

    fn apply_block(&self, spin: Spin, rhs: MatRef<'_, c64>) -> Result<Mat<c64>> {
        riesz_apply(self.h, self.contour, spin, rhs)
    }
}

/// `Pi = sum_{lambda < E_F} v v^dagger`, as a frame of eigenvectors.
pub fn fermi_projection(spectrum: &Spectrum, gap: &GapInfo) -> Result<Projection> {
    let [up, down] = Spin::BOTH.map(|s| {
        let b = spectrum.block(s);
        if gap.fermi_energy >= b.computed_up_to() {
            return Err(Error::FermiAboveComputed { fermi: gap.fermi_energy, computed_up_to: b.computed_up_to() });
        }
        Ok(ProjBlock::Frame(b.frame_below(gap.fermi_energy)))
    });
    Projection::new(spectrum.geometry.clone(), up?, down?)
}

/// `(i / 2 pi) oint (H_s - w)^{-1} rhs dw` in one spin block.
pub fn riesz_apply(h: &OperatorMatrix, contour: &Contour, spin: Spin, rhs: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let block = h.block(spin);
    let sum = contour.integrate(rhs.nrows(), rhs.ncols(), |w| Ok(factorize(block, w)?.solve(rhs)))?;
    Ok(sum * faer::Scale(riesz_factor()))
}

/// Riesz projection `(i / 2 pi) oint (H - w)^{-1} dw` as explicit matrices.
pub fn riesz_projection(h: &OperatorMatrix, contour: &Contour) -> Result<Projection> {
    let n = h.geometry().nsites();
    let eye = linalg::identity(n);
    let [up, down] = Spin::BOTH.map(|s| riesz_apply(h, contour, s, eye.as_ref()).map(ProjBlock::Matrix));
    Projection::new(h.geometry().clone(), up?, down?)
}

/// `A^OD = Pi A Pi^perp + Pi^perp A Pi`.
pub fn offdiagonal_part(a: &OperatorMatrix, p: &Projection) -> Result<OperatorMatrix> {
    if **a.geometry() != **p.geometry() {
        return Err(Error::GeometryMismatch("operator and projection".into()));
    }
    let [up, down] = Spin::BOTH.map(|s| {
        let am = a.block(s).to_dense();
        let pm = p.matrix(s);
        let n = pm.nrows();
        let q = linalg::identity(n) - &pm;
        Block::Dense(&pm * &am * &q + &q * &am * &pm)
    });
    OperatorMatrix::new(a.geometry().clone(), up, down)
}

/// `Pi X` for every spin block, with `X` a dense operator.
pub fn project_left(p: &Projection, a: &OperatorMatrix) -> Result<OperatorMatrix> {
    let [up, down] = Spin::BOTH.map(|s| Block::Dense(p.apply(s, a.block(s).to_dense().as_ref())));
    OperatorMatrix::new(a.geometry().clone(), up, down)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, HamiltonianSpec};
    use crate::spectral::{build_contour, detect_gap, eigensolve, EigenOptions};

    fn hofstadter() -> (OperatorMatrix, Spectrum) {
        let spec = HamiltonianSpec { half_width_l: 4, tb_spin_flux_offset: 1.0 / 3.0, ..Default::default() };
        let h = build_hamiltonian(&spec).unwrap();
        let s = eigensolve(&h, &EigenOptions::default()).unwrap();
        (h, s)
    }

    #[test]
    fn limits_and_rank() {
        let (_, s) = hofstadter();
        let ev = s.eigenvalues();
        let below = fermi_projection(&s, &detect_gap(&s, ev[0] - 1.0).unwrap()).unwrap();
        assert_eq!(below.rank(Spin::Up) + below.rank(Spin::Down), 0.0);
        let above = fermi_projection(&s, &detect_gap(&s, ev[ev.len() - 1] + 1.0).unwrap()).unwrap();
        let n = s.geometry.nsites();
        assert!(linalg::max_abs((above.matrix(Spin::Up) - linalg::identity(n)).as_ref()) < 1e-12);
        let g = detect_gap(&s, -1.4).unwrap();
        let p = fermi_projection(&s, &g).unwrap();
        assert!((p.rank(Spin::Up) + p.rank(Spin::Down) - g.rank_below as f64).abs() < 1e-10);
        assert!(p.idempotency_residual() < 1e-10);
    }

    #[test]
    fn riesz_matches_spectral() {
        // the torus has no edge states, so the bulk gap is fully open
        let spec = HamiltonianSpec {
            half_width_l: 3,
            boundary: crate::model::Boundary::Torus,
            tb_spin_flux_offset: 1.0 / 3.0,
            ..Default::default()
        };
        let h = build_hamiltonian(&spec).unwrap();
        let s = eigensolve(&h, &EigenOptions::default()).unwrap();
        let g = detect_gap(&s, -1.4).unwrap();
        let c = build_contour(&g, &s, 64).unwrap();
        let r = riesz_projection(&h, &c).unwrap();
        let p = fermi_projection(&s, &g).unwrap();
        assert!(r.distance(&p) < 1e-8, "{}", r.distance(&p));
    }

    #[test]
    fn offdiagonal_parts() {
        let (h, s) = hofstadter();
        let p = fermi_projection(&s, &detect_gap(&s, -1.4).unwrap()).unwrap();
        // H commutes with its own Fermi projection
        assert!(offdiagonal_part(&h, &p).unwrap().max_abs() < 1e-10);
        let (up, down) = p.spin_decompose();
        assert_eq!(up.rank(Spin::Down), 0.0);
        assert_eq!(down.rank(Spin::Up), 0.0);
    }
}
