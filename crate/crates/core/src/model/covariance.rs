//! Magnetic covariance of kernels on the torus.

use faer::c64;

use super::geometry::{Geometry, Spin};
use super::operator::OperatorMatrix;
use super::spec::{Backend, HamiltonianSpec};
use crate::error::{Error, Result};

/// Kernel of one spin block extended quasi-periodically off the fundamental
/// domain, using the magnetic boundary phases of the torus.
struct Extended<'a> {
    op: &'a OperatorMatrix,
    spin: Spin,
    field: f64,
}

impl Extended<'_> {
    /// Splits a lattice point into a stored site and its winding numbers.
    fn wrap(&self, geom: &Geometry, x: [f64; 2]) -> Option<(usize, [i64; 2], [f64; 2])> {
        let lt = geom.period();
        let l = geom.half_width as f64;
        let mut m = [0i64; 2];
        let mut base = x;
        for j in 0..2 {
            // fundamental domain (-L, L]
            let k = ((x[j] + l) / lt - 1e-9).ceil() - 1.0;
            m[j] = k as i64;
            base[j] = x[j] - k * lt;
        }
        let a = geom.index_1d(base[0])?;
        let b = geom.index_1d(base[1])?;
        Some((geom.index(a, b), m, base))
    }

    /// Phase `theta` with `psi(base + m1 a1 + m2 a2) = e^{i theta} psi(base)`.
    fn phase(&self, geom: &Geometry, m: [i64; 2], base: [f64; 2]) -> f64 {
        let lt = geom.period();
        let chi1 = 0.5 * self.field * lt * base[1];
        let shifted_x1 = base[0] + m[0] as f64 * lt;
        let chi2 = -0.5 * self.field * lt * shifted_x1;
        m[0] as f64 * chi1 + m[1] as f64 * chi2
    }

    fn get(&self, geom: &Geometry, x: [f64; 2], y: [f64; 2]) -> Option<c64> {
        let (i, mx, bx) = self.wrap(geom, x)?;
        let (j, my, by) = self.wrap(geom, y)?;
        let v = self.op.block(self.spin).get(i, j);
        let theta = self.phase(geom, mx, bx) - self.phase(geom, my, by);
        Some(v * c64::from_polar(1.0, theta))
    }
}

/// Relative covariance defect
/// `max |e^{i B (x2 n1 - x1 n2)/2} K(x-n; y-n) e^{-i B (y2 n1 - y1 n2)/2} - K(x; y)| / max |K|`
/// over both spin blocks, for a lattice translation `n` of the torus.
/// `spec` supplies the flux density seen by each spin sector.
///
/// The stored kernel is the quasi-periodic one, so the identity holds only
/// when the translation is compatible with the boundary phases, i.e. when
/// `B L_T n_j` is a multiple of `2 pi` for both components.
pub fn covariance_check(op: &OperatorMatrix, spec: &HamiltonianSpec, n: (i64, i64)) -> Result<f64> {
    let geom = op.geometry().as_ref();
    if !geom.is_torus() {
        return Err(Error::IncommensurateTranslation { n });
    }
    let scale = op.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let nv = [n.0 as f64, n.1 as f64];
    let mut worst = 0.0f64;
    for spin in Spin::BOTH {
        let field = match spec.backend {
            Backend::Continuum => spec.b2,
            Backend::Tightbinding => spec.sector_field(spin.sign()),
        };
        let ext = Extended { op, spin, field };
        let phase = |x: [f64; 2]| 0.5 * field * (x[1] * nv[0] - x[0] * nv[1]);
        let mut check = |x: [f64; 2], y: [f64; 2]| -> Result<()> {
            let k = ext.get(geom, x, y).ok_or(Error::IncommensurateTranslation { n })?;
            let kt = ext
                .get(geom, [x[0] - nv[0], x[1] - nv[1]], [y[0] - nv[0], y[1] - nv[1]])
                .ok_or(Error::IncommensurateTranslation { n })?;
            let lhs = c64::from_polar(1.0, phase(x) - phase(y)) * kt;
            worst = worst.max((lhs - k).norm());
            Ok(())
        };
        for (i, j, _) in op.block(spin).entries() {
            let (x, y) = (geom.coords(i), geom.coords(j));
            // pairs where K(x; y) is stored, and pairs mapped onto stored ones
            check(x, y)?;
            check([x[0] + nv[0], x[1] + nv[1]], [y[0] + nv[0], y[1] + nv[1]])?;
        }
    }
    Ok(worst / scale)
}
