//! Finite-temperature, finite-frequency Kubo spin conductivity in the
//! eigenbasis of a finite open sample.
//!
//! Per spin block, with `f` the Fermi–Dirac occupation and `Im w < 0`,
//!
//! ```text
//! int_{-inf}^0 ds <a| e^{is(H+w)} P2 e^{-isH} [P1, f] |a>   summed over a
//!   = sum_{a,b} P2_ab P1_ba (f_a - f_b) (-i) / (l_a - l_b + w).
//! ```
//!
//! The response is `+(1/(w |Lambda|)) sum_s s^z` of that sum
//! ([`KuboResult::sigma_volume`]). Starting from the Dyson term
//! `-i int ds e^{iws} Tr([X2^I(s), f] J1)` with `J1 = -P1 S^z`, integrating
//! by parts gives `int e^{iws} g = g(0)/(iw) - (1/(iw)) int e^{iws} g'`; the
//! boundary term is the vanishing equilibrium piece and the derivative term
//! comes with a plus sign in front of `1/(w |Lambda|)`. Printed with a minus
//! sign, the formula converges to the negative of the contour limit.
//!
//! Writing `P1_ba = i (l_b - l_a) X1_ba` splits the summand into
//! `-P2_ab X1_ba (f_a - f_b)`, whose sum is `Tr(f [X1, P2])` and vanishes
//! for nearest-neighbour stencils, plus
//! `w P2_ab X1_ba (f_a - f_b) / (l_a - l_b + w)`. The `1/w` cancels and
//!
//! ```text
//! sigma^z = sum_s s^z Tr(P2 rho_s),   (rho_s)_ba = X1_ba (f_a - f_b) / (l_a - l_b + w).
//! ```
//!
//! `rho_s` is the first-order density matrix. Its trace against `P2` is
//! local, so it can be taken per unit volume over a bulk window
//! ([`KuboResult::sigma`]); the full trace over `|Lambda|` picks up the
//! cancelling edge currents of the open sample and tends to zero.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};
use crate::markers::BulkWindow;
use crate::model::{build_hamiltonian, position_operators, velocity_operators, HamiltonianSpec, Spin};
use crate::par;
use crate::spectral::EigenOptions;

/// Parameters of a finite-temperature, finite-frequency evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KuboParams {
    /// Temperature `T = 1/beta`; zero gives the step occupation.
    #[serde(rename = "T")]
    pub temperature: f64,
    pub mu: f64,
    /// Complex frequency; `Im omega < 0` switches the field on adiabatically.
    pub omega: c64,
    /// Field amplitude. Responses are reported per unit field.
    #[serde(rename = "E")]
    pub field: f64,
}

impl KuboParams {
    /// The approach path `T = t`, `omega = t (1 - i)`.
    pub fn along_path(t: f64, mu: f64) -> Self {
        KuboParams { temperature: t, mu, omega: c64::new(t, -t), field: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidKubo(format!("temperature must be finite and >= 0, got {}", self.temperature)));
        }
        if !self.mu.is_finite() {
            return Err(Error::InvalidKubo(format!("mu must be finite, got {}", self.mu)));
        }
        if !(self.omega.im < 0.0) || !self.omega.re.is_finite() || !self.omega.im.is_finite() {
            return Err(Error::InvalidKubo(format!("omega must have a negative imaginary part, got {}", self.omega)));
        }
        Ok(())
    }
}

/// Fermi–Dirac occupation `1 / (1 + e^{(e - mu)/T})`.
pub fn fermi_dirac(e: f64, mu: f64, t: f64) -> f64 {
    if t == 0.0 {
        return if e < mu { 1.0 } else { 0.0 };
    }
    let x = (e - mu) / t;
    if x > 0.0 {
        let y = (-x).exp();
        y / (1.0 + y)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KuboResult {
    /// Spin conductivity per unit volume over the bulk window.
    pub sigma: c64,
    /// Full-trace double sum, normalized by `omega |Lambda|`.
    pub sigma_volume: c64,
    /// Full trace of the regularized form over `|Lambda|`; equals
    /// `sigma_volume` up to `Tr(f [X1, P2])`.
    pub sigma_volume_regularized: c64,
    /// Per-block charge conductivities over the window (up, down);
    /// `sigma = (per_block[0] - per_block[1]) / 2`.
    pub per_block: [c64; 2],
}

struct BlockData {
    spin: Spin,
    vals: Vec<f64>,
    /// Window rows of the eigenvector matrix.
    vw: Mat<c64>,
    x1: Mat<c64>,
    p1: Mat<c64>,
    p2: Mat<c64>,
}

/// Eigenbasis data of one open sample, reused across `(T, omega)` points.
pub struct KuboEvaluator {
    blocks: Vec<BlockData>,
    window_area: f64,
    sample_area: f64,
}

impl KuboEvaluator {
    /// Diagonalizes both blocks of `spec` densely. `window` defaults to
    /// [`BulkWindow::default_for`].
    pub fn new(spec: &HamiltonianSpec, window: Option<BulkWindow>) -> Result<Self> {
        if spec.boundary != crate::model::Boundary::Dirichlet {
            return Err(Error::PositionOnTorus);
        }
        let h = build_hamiltonian(spec)?;
        let g = h.geometry().clone();
        let window = match window {
            Some(w) => w,
            None => BulkWindow::default_for(&g)?,
        };
        if *window.geometry != *g {
            return Err(Error::GeometryMismatch("Kubo window".into()));
        }
        let cutoff = EigenOptions::default().dense_cutoff;
        if g.nsites() > cutoff {
            return Err(Error::DimensionTooLarge { dim: g.nsites(), cutoff });
        }
        let (x1, _) = position_operators(&g)?;
        let (p1, p2) = velocity_operators(&h)?;
        let blocks = par::try_map_range(2, |i| {
            let spin = Spin::BOTH[i];
            let (vals, v) = linalg::hermitian_eigen(h.block(spin).to_dense().as_ref())?;
            let vt = v.adjoint().to_owned();
            let rotate = |op: &crate::model::OperatorMatrix| -> Mat<c64> {
                let right = op.block(spin).mul_dense(v.as_ref());
                &vt * right
            };
            let vw = Mat::from_fn(window.sites.len(), v.ncols(), |r, c| v[(window.sites[r], c)]);
            Ok::<_, Error>(BlockData { spin, vals, vw, x1: rotate(&x1), p1: rotate(&p1), p2: rotate(&p2) })
        })?;
        let h2 = g.spacing * g.spacing;
        Ok(KuboEvaluator { blocks, window_area: window.area, sample_area: g.nsites() as f64 * h2 })
    }

    /// Eigenvalues of both blocks, ascending.
    pub fn eigenvalues(&self, spin: Spin) -> &[f64] {
        &self.blocks[spin.index()].vals
    }

    pub fn eval(&self, params: &KuboParams) -> Result<KuboResult> {
        params.validate()?;
        for b in &self.blocks {
            if let Some(&l) = b.vals.iter().find(|&&l| (l - params.mu).abs() <= 1e-10 * params.mu.abs().max(1.0)) {
                return Err(Error::InvalidKubo(format!("mu = {} coincides with the eigenvalue {l}", params.mu)));
            }
        }
        let w = params.omega;
        let mut per_block = [ZERO; 2];
        let mut volume = ZERO;
        let mut regularized = ZERO;
        for b in &self.blocks {
            let n = b.vals.len();
            let f: Vec<f64> = b.vals.iter().map(|&l| fermi_dirac(l, params.mu, params.temperature)).collect();
            let rho = Mat::from_fn(n, n, |bi, a| {
                let df = f[a] - f[bi];
                if df == 0.0 {
                    return ZERO;
                }
                b.x1[(bi, a)] * df / (c64::new(b.vals[a] - b.vals[bi], 0.0) + w)
            });
            let p2rho = &b.p2 * &rho;
            let g = &b.vw * &p2rho;
            // sum_{x in W} (V P2 rho V^dagger)_xx
            let local: c64 =
                (0..g.nrows()).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| g[(r, c)] * b.vw[(r, c)].conj()).sum();
            per_block[b.spin.index()] = local / self.window_area;
            regularized += b.spin.sz() * linalg::trace(p2rho.as_ref()) / self.sample_area;
            let mut lit = ZERO;
            for a in 0..n {
                for bi in 0..n {
                    let df = f[a] - f[bi];
                    if df == 0.0 {
                        continue;
                    }
                    lit += b.p2[(a, bi)] * b.p1[(bi, a)] * df * c64::new(0.0, -1.0)
                        / (c64::new(b.vals[a] - b.vals[bi], 0.0) + w);
                }
            }
            volume += b.spin.sz() * lit / (w * self.sample_area);
        }
        Ok(KuboResult {
            sigma: 0.5 * (per_block[0] - per_block[1]),
            sigma_volume: volume,
            sigma_volume_regularized: regularized,
            per_block,
        })
    }

    /// `sum_s s^z Tr(f(H_s) (-i)[H_s, X1])`, the equilibrium spin current.
    pub fn equilibrium_current(&self, mu: f64, temperature: f64) -> c64 {
        self.blocks
            .iter()
            .map(|b| {
                let tr: c64 =
                    (0..b.vals.len()).map(|a| -b.p1[(a, a)] * fermi_dirac(b.vals[a], mu, temperature)).sum();
                b.spin.sz() * tr
            })
            .sum()
    }

    /// Dimension of the full (two-block) Hilbert space.
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.vals.len()).sum()
    }
}

/// Kubo spin conductivity of `spec` over its default bulk window.
pub fn kubo_sigma(spec: &HamiltonianSpec, params: &KuboParams) -> Result<c64> {
    params.validate()?;
    Ok(KuboEvaluator::new(spec, None)?.eval(params)?.sigma)
}
