//! Closed contours around the occupied part of the spectrum and quadrature
//! of contour integrals.
//!
//! The rectangle encloses `[lambda_min - 1, c]` where `c` is the midpoint of
//! the gap. Each side is split into Gauss-Legendre panels; the vertical sides
//! are graded geometrically toward their real-axis crossings, where the
//! integrand is closest to the spectrum. Panel node counts follow the
//! Bernstein ellipse of the nearest spectral point. When the occupied band is
//! narrow compared with its distance to the rest of the spectrum, a circle
//! with the trapezoidal rule does better, and [`contour_for_gap`] picks
//! whichever of the two has the smaller estimated error.

use std::f64::consts::PI;

use faer::{c64, Mat};

use super::eigen::Spectrum;
use super::gap::GapInfo;
use crate::error::{Error, Result};
use crate::par;

/// Quadrature for `oint f(w) dw`: `sum_k weights[k] f(nodes[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub nodes: Vec<c64>,
    pub weights: Vec<c64>,
    /// Real interval enclosed by the contour.
    pub enclosed_interval: (f64, f64),
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=q {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = q as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[q - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[q - 1 - i] = wi;
    }
    (x, w)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    from: c64,
    to: c64,
}

/// Splits the segment `from -> to` into panels whose lengths grow by a
/// factor of 2 starting with `first` at the `from` end.
fn graded(from: c64, to: c64, first: f64, out: &mut Vec<Panel>) {
    let len = (to - from).norm();
    let dir = (to - from) / len;
    let mut t = 0.0;
    let mut step = first.min(len);
    while t < len {
        let mut next = t + step;
        // absorb a sliver at the end into the last panel
        if len - next < 0.5 * step {
            next = len;
        }
        out.push(Panel { from: from + dir * t, to: from + dir * next });
        t = next;
        step *= 2.0;
    }
}

fn uniform(from: c64, to: c64, max_len: f64, out: &mut Vec<Panel>) {
    let len = (to - from).norm();
    let m = (len / max_len).ceil().max(1.0) as usize;
    for k in 0..m {
        let a = from + (to - from) * (k as f64 / m as f64);
        let b = from + (to - from) * ((k + 1) as f64 / m as f64);
        out.push(Panel { from: a, to: b });
    }
}

/// Smallest Bernstein ellipse parameter of a real point `s` with respect to
/// the panel; Gauss-Legendre with `q` nodes converges like `rho^(-2q)`.
fn bernstein_rho(panel: &Panel, s: f64) -> f64 {
    let u = (c64::new(2.0 * s, 0.0) - panel.from - panel.to) / (panel.to - panel.from);
    let w = u + (u * u - 1.0).sqrt();
    w.norm().max(1.0 / w.norm())
}

/// Distributes `nodes` over the panels (at least 4 each) so that the
/// largest estimated panel error `len / dist * rho^(-2q)` is smallest.
fn allocate_nodes(panels: &[Panel], spectrum: &[(f64, f64)], nodes: usize) -> Vec<usize> {
    const SAMPLES: usize = 200;
    let weight: Vec<(f64, f64)> = panels
        .iter()
        .map(|p| {
            let mut rho = f64::INFINITY;
            let mut dist = f64::INFINITY;
            for &(a, b) in spectrum {
                for k in 0..=SAMPLES {
                    let s = a + (b - a) * k as f64 / SAMPLES as f64;
                    rho = rho.min(bernstein_rho(p, s));
                    let z = c64::new(s, 0.0);
                    dist = dist.min((p.from - z).norm()).min((p.to - z).norm());
                }
            }
            // ln of the prefactor, and ln rho
            (((p.to - p.from).norm() / dist.max(1e-300)).ln(), rho.ln())
        })
        .collect();
    let mut counts = vec![4usize; panels.len()];
    let est = |k: usize, q: usize| weight[k].0 - 2.0 * q as f64 * weight[k].1;
    for _ in 0..nodes.saturating_sub(4 * panels.len()) {
        let k = (0..panels.len()).max_by(|&a, &b| est(a, counts[a]).total_cmp(&est(b, counts[b]))).unwrap_or(0);
        counts[k] += 1;
    }
    counts
}

impl Contour {
    /// Positively oriented rectangle `[left, right] x [-i h, i h]`, with the
    /// vertical sides graded toward the real axis using first panel lengths
    /// `d_left` and `d_right`. Uses at least `nodes` points (4 per panel).
    pub fn rectangle(left: f64, right: f64, half_height: f64, d_left: f64, d_right: f64, nodes: usize) -> Result<Self> {
        if !(left < right) || !(half_height > 0.0) || !(d_left > 0.0) || !(d_right > 0.0) {
            return Err(Error::InvalidContour(format!(
                "rectangle [{left}, {right}] x [-{half_height}i, {half_height}i] is degenerate"
            )));
        }
        if nodes < 16 {
            return Err(Error::InvalidContour(format!("need at least 16 nodes, got {nodes}")));
        }
        let c = |x: f64, y: f64| c64::new(x, y);
        let h = half_height;
        let mut panels = Vec::new();
        graded(c(right, 0.0), c(right, h), d_right, &mut panels);
        let mut lower_right = Vec::new();
        graded(c(right, 0.0), c(right, -h), d_right, &mut lower_right);
        panels.extend(lower_right.into_iter().map(|p| Panel { from: p.to, to: p.from }));
        uniform(c(right, h), c(left, h), h, &mut panels);
        let mut upper_left = Vec::new();
        graded(c(left, 0.0), c(left, h), d_left, &mut upper_left);
        panels.extend(upper_left.into_iter().map(|p| Panel { from: p.to, to: p.from }));
        graded(c(left, 0.0), c(left, -h), d_left, &mut panels);
        uniform(c(left, -h), c(right, -h), h, &mut panels);

        // the spectrum lies on the real axis at distance d_left and d_right
        // from the two crossings: inside up to the gap, outside beyond it
        let inside = (left + d_left, right - d_right);
        let outside = (right + d_right, right + d_right + 4.0 * (right - left + h));
        let counts = allocate_nodes(&panels, &[inside, outside], nodes);
        let mut out = Contour { nodes: Vec::new(), weights: Vec::new(), enclosed_interval: (left, right) };
        for (panel, q) in panels.iter().zip(counts) {
            let (x, w) = gauss_legendre(q);
            let mid = (panel.from + panel.to) * 0.5;
            let half = (panel.to - panel.from) * 0.5;
            for (xi, wi) in x.iter().zip(&w) {
                out.nodes.push(mid + half * *xi);
                out.weights.push(half * *wi);
            }
        }
        Ok(out)
    }

    /// Trapezoidal rule on a positively oriented circle.
    pub fn circle(center: c64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) || nodes == 0 {
            return Err(Error::InvalidContour(format!("circle of radius {radius} with {nodes} nodes")));
        }
        let mut out = Contour {
            nodes: Vec::with_capacity(nodes),
            weights: Vec::with_capacity(nodes),
            enclosed_interval: (center.re - radius, center.re + radius),
        };
        for k in 0..nodes {
            let e = c64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
            out.nodes.push(center + e * radius);
            out.weights.push(c64::new(0.0, 2.0 * PI * radius / nodes as f64) * e);
        }
        Ok(out)
    }

    /// A contour with no nodes; every integral over it is zero.
    pub fn empty() -> Self {
        Contour { nodes: Vec::new(), weights: Vec::new(), enclosed_interval: (0.0, 0.0) }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest error of the Riesz quadrature of the scalar resolvent
    /// `1 / (w - x)` over points `x` of the two real intervals, which must lie
    /// inside and outside the contour respectively.
    pub fn error_estimate(&self, inside: (f64, f64), outside: (f64, f64)) -> f64 {
        const SAMPLES: usize = 200;
        let mut worst = 0.0f64;
        for ((a, b), exact) in [(inside, 1.0), (outside, 0.0)] {
            for k in 0..=SAMPLES {
                let x = a + (b - a) * k as f64 / SAMPLES as f64;
                let v = riesz_factor() * self.integrate_scalar(|w| c64::new(1.0, 0.0) / (x - w));
                worst = worst.max((v - exact).norm());
            }
        }
        worst
    }

    /// `sum_k weights[k] f(nodes[k])` for scalar integrands.
    pub fn integrate_scalar(&self, f: impl Fn(c64) -> c64) -> c64 {
        self.nodes.iter().zip(&self.weights).map(|(&w, &q)| q * f(w)).sum()
    }

    /// `sum_k weights[k] f(nodes[k])` for matrix-valued integrands of shape
    /// `rows x cols`, evaluated in parallel over nodes.
    pub fn integrate<F>(&self, rows: usize, cols: usize, f: F) -> Result<Mat<c64>>
    where
        F: Fn(c64) -> Result<Mat<c64>> + Sync,
    {
        let mut acc = Mat::<c64>::zeros(rows, cols);
        // bounded batches keep memory flat for large integrands
        let batch = 8;
        for start in (0..self.len()).step_by(batch) {
            let end = (start + batch).min(self.len());
            let parts = par::try_map_range(end - start, |k| {
                let idx = start + k;
                let mut m = f(self.nodes[idx])?;
                let q = self.weights[idx];
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        m[(i, j)] *= q;
                    }
                }
                Ok::<_, Error>(m)
            })?;
            for m in parts {
                if (m.nrows(), m.ncols()) != (rows, cols) {
                    return Err(Error::Shape(format!("integrand is {}x{}, expected {rows}x{cols}", m.nrows(), m.ncols())));
                }
                acc += &m;
            }
        }
        Ok(acc)
    }

    /// Smallest distance from a node to the given eigenvalues.
    pub fn distance_to(&self, eigenvalues: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for w in &self.nodes {
            for &l in eigenvalues {
                best = best.min((w - c64::new(l, 0.0)).norm());
            }
        }
        best
    }
}

/// Rectangle enclosing every eigenvalue below `E_F`: left side at
/// `lambda_min - 1`, right side crossing the real axis at the middle of the
/// gap, horizontal sides at `+-(gap/2 + 1)`. If it is more accurate, a
/// circle around the occupied band crossing the gap replaces it, with the
/// same number of nodes. With nothing below `E_F` the
/// rectangle sits to the left of the spectrum; with nothing above it, it
/// extends one unit past the top eigenvalue.
pub fn build_contour(gap: &GapInfo, spectrum: &Spectrum, nodes: usize) -> Result<Contour> {
    let levels = spectrum.eigenvalues();
    let lmin = levels.first().copied().ok_or_else(|| Error::InvalidContour("empty spectrum".into()))?;
    contour_for_gap(gap, lmin, nodes)
}

/// [`build_contour`] from the gap and the lowest eigenvalue alone.
pub fn contour_for_gap(gap: &GapInfo, lmin: f64, nodes: usize) -> Result<Contour> {
    if !(gap.gap_upper > gap.gap_lower) {
        return Err(Error::DegenerateGap(format!("gap ({}, {}) is empty", gap.gap_lower, gap.gap_upper)));
    }
    let (left, right, half, d_right) = match (gap.gap_lower.is_finite(), gap.gap_upper.is_finite()) {
        (true, true) => {
            let g = gap.width();
            let rect = Contour::rectangle(lmin - 1.0, gap.gap_lower + 0.5 * g, 0.5 * g + 1.0, 1.0, 0.5 * g, nodes)?;
            // a narrow occupied band far from the rest of the spectrum is
            // better served by a circle between the two
            let r0 = 0.5 * (gap.gap_lower - lmin) + 1e-3 * g;
            let centre = lmin + r0;
            let circ = Contour::circle(c64::new(centre, 0.0), (r0 * (gap.gap_upper - centre)).sqrt(), rect.len())?;
            let inside = (lmin, gap.gap_lower);
            let outside = (gap.gap_upper, gap.gap_upper + 4.0 * (gap.gap_upper - lmin + 1.0));
            let (er, ec) = (rect.error_estimate(inside, outside), circ.error_estimate(inside, outside));
            return Ok(if ec < er { circ } else { rect });
        }
        (false, true) => (lmin - 2.0, lmin - 1.0, 1.5, 1.0),
        (true, false) => (lmin - 1.0, gap.gap_lower + 1.0, 1.5, 1.0),
        (false, false) => return Err(Error::DegenerateGap("no eigenvalues".into())),
    };
    Contour::rectangle(left, right, half, 1.0, d_right, nodes)
}

/// `(i / 2 pi) sum_k weights[k] f(nodes[k])`: the Riesz normalization.
pub fn riesz_factor() -> c64 {
    c64::new(0.0, 0.5 / PI)
}
