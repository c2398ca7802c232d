//! Finite-difference Středa derivative and the three-way comparison
//! `dIsDOS/dB = SCh / 2pi = sigma^z_12`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize, Serializer};

use super::contour_sigma::{sigma_zero_limit, ZeroLimit};
use crate::error::{Error, Result, StageExt};
use crate::markers::{compute_markers, isdos, BulkWindow, MarkerDetails, WindowParams, MARKER_IMAG_TOL};
use crate::model::{build_hamiltonian, velocity_operators, HamiltonianSpec, OperatorMatrix};
use crate::par;
use crate::spectral::{build_contour, detect_gap, eigensolve, fermi_projection, EigenOptions, GapInfo, Projection, Spectrum};

/// Default field step of the central difference.
pub const DEFAULT_DELTA_B: f64 = 1e-3;

/// Settings shared by the Středa pipelines.
#[derive(Debug, Clone, PartialEq)]
pub struct StredaOptions {
    pub fermi: f64,
    pub contour_nodes: usize,
    pub window: WindowParams,
    pub eigen: EigenOptions,
}

impl StredaOptions {
    /// 128 contour nodes, default window, partial eigensolves above the
    /// dense cutoff.
    pub fn new(fermi: f64) -> Self {
        StredaOptions { fermi, contour_nodes: 128, window: WindowParams::default(), eigen: EigenOptions::partial(fermi) }
    }

    fn eigen_options(&self) -> EigenOptions {
        match self.eigen.partial_up_to {
            Some(_) => EigenOptions { partial_up_to: Some(self.fermi), ..self.eigen },
            None => self.eigen,
        }
    }
}

/// Hamiltonian, spectrum, gap and Fermi projection of one spec.
pub struct FieldPoint {
    pub spec: HamiltonianSpec,
    pub h: OperatorMatrix,
    pub spectrum: Spectrum,
    pub gap: GapInfo,
    pub projection: Projection,
    pub window: BulkWindow,
}

/// Where spectra come from. The CLI plugs its on-disk cache in here.
pub trait SpectrumSource: Sync {
    fn spectrum(&self, spec: &HamiltonianSpec, h: &OperatorMatrix, opts: &EigenOptions) -> Result<Spectrum>;
}

/// Always diagonalizes.
pub struct DirectSolve;

impl SpectrumSource for DirectSolve {
    fn spectrum(&self, _spec: &HamiltonianSpec, h: &OperatorMatrix, opts: &EigenOptions) -> Result<Spectrum> {
        eigensolve(h, opts)
    }
}

/// Builds and diagonalizes `spec` and locates the gap around `opts.fermi`.
pub fn solve_at(spec: &HamiltonianSpec, opts: &StredaOptions) -> Result<FieldPoint> {
    solve_at_with(spec, opts, &DirectSolve)
}

pub fn solve_at_with(spec: &HamiltonianSpec, opts: &StredaOptions, source: &dyn SpectrumSource) -> Result<FieldPoint> {
    let h = build_hamiltonian(spec).stage("build")?;
    let window = opts.window.resolve(h.geometry()).stage("window")?;
    let spectrum = source.spectrum(spec, &h, &opts.eigen_options()).stage("eigensolve")?;
    let gap = detect_gap(&spectrum, opts.fermi).stage("detect_gap")?;
    let projection = fermi_projection(&spectrum, &gap).stage("projection")?;
    Ok(FieldPoint { spec: spec.clone(), h, spectrum, gap, projection, window })
}

/// How the field `B` enters a spec; the default sets `B1 = B2 = B`.
pub type FieldMap = fn(&HamiltonianSpec, f64) -> HamiltonianSpec;

pub fn equal_components(spec: &HamiltonianSpec, b: f64) -> HamiltonianSpec {
    spec.with_field(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StredaDerivative {
    pub b: f64,
    pub delta_b: f64,
    pub isdos_minus: f64,
    pub isdos_plus: f64,
    pub fd_derivative: f64,
}

/// `(IsDOS(B + dB) - IsDOS(B - dB)) / 2dB` with both endpoint Hamiltonians
/// rebuilt at `B1 = B2 = B +- dB` and `E_F` held fixed.
pub fn streda_derivative(spec: &HamiltonianSpec, b: f64, delta_b: f64, opts: &StredaOptions) -> Result<StredaDerivative> {
    streda_derivative_with(spec, b, delta_b, opts, equal_components, None, &DirectSolve)
}

/// [`streda_derivative`] with an explicit field map. With `reference_rank`
/// set, an endpoint whose occupied rank differs is refused as a gap closing.
pub fn streda_derivative_with(
    spec: &HamiltonianSpec,
    b: f64,
    delta_b: f64,
    opts: &StredaOptions,
    field_map: FieldMap,
    reference_rank: Option<[usize; 2]>,
    source: &dyn SpectrumSource,
) -> Result<StredaDerivative> {
    if !(delta_b > 0.0) || !delta_b.is_finite() {
        return Err(Error::InvalidSpec { field: "delta_B", reason: format!("must be positive, got {delta_b}") });
    }
    let values = par::try_map_range(2, |i| {
        let endpoint = if i == 0 { b - delta_b } else { b + delta_b };
        let point = solve_at_with(&field_map(spec, endpoint), opts, source).map_err(|e| match e.root() {
            Error::FermiInSpectrum { .. } | Error::FermiAboveComputed { .. } | Error::DegenerateGap(_) => {
                Error::GapClosed { endpoint, reason: e.to_string() }
            }
            _ => e,
        })?;
        if let Some(rank) = reference_rank {
            if point.gap.rank_per_spin != rank {
                return Err(Error::GapClosed {
                    endpoint,
                    reason: format!(
                        "occupied rank changes from {rank:?} to {:?} with E_F = {} fixed",
                        point.gap.rank_per_spin, opts.fermi
                    ),
                });
            }
        }
        isdos(&point.projection, &point.window)
    })?;
    let (isdos_minus, isdos_plus) = (values[0], values[1]);
    Ok(StredaDerivative { b, delta_b, isdos_minus, isdos_plus, fd_derivative: (isdos_plus - isdos_minus) / (2.0 * delta_b) })
}

/// The three sides of the spin Středa formula at one field value.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StredaReport {
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "delta_B")]
    pub delta_b: f64,
    pub isdos_minus: f64,
    pub isdos_plus: f64,
    pub fd_derivative: f64,
    pub sch_over_2pi: f64,
    pub sigma_contour: f64,
    pub residual_streda_fd: f64,
    pub residual_streda_kubo: f64,
}

impl StredaReport {
    pub fn new(fd: &StredaDerivative, sch: f64, sigma_contour: f64) -> Self {
        let mut r = StredaReport {
            b: fd.b,
            delta_b: fd.delta_b,
            isdos_minus: fd.isdos_minus,
            isdos_plus: fd.isdos_plus,
            fd_derivative: fd.fd_derivative,
            sch_over_2pi: sch / (2.0 * PI),
            sigma_contour,
            residual_streda_fd: 0.0,
            residual_streda_kubo: 0.0,
        };
        r.recompute();
        r
    }

    /// Refreshes both residuals from the three values.
    pub fn recompute(&mut self) {
        self.residual_streda_fd = (self.fd_derivative - self.sch_over_2pi).abs();
        self.residual_streda_kubo = (self.sigma_contour - self.sch_over_2pi).abs();
    }

    /// Largest pairwise difference of the three values.
    pub fn max_pairwise(&self) -> f64 {
        let v = [self.fd_derivative, self.sch_over_2pi, self.sigma_contour];
        let mut m = 0.0f64;
        for i in 0..3 {
            for j in 0..i {
                m = m.max((v[i] - v[j]).abs());
            }
        }
        m
    }

    /// `max_pairwise / max(1, |SCh / 2pi|)`.
    pub fn relative_spread(&self) -> f64 {
        self.max_pairwise() / self.sch_over_2pi.abs().max(1.0)
    }
}

impl Serialize for StredaReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            #[serde(rename = "B")]
            b: f64,
            #[serde(rename = "delta_B")]
            delta_b: f64,
            isdos_minus: f64,
            isdos_plus: f64,
            fd_derivative: f64,
            sch_over_2pi: f64,
            sigma_contour: f64,
            residual_streda_fd: f64,
            residual_streda_kubo: f64,
        }
        let mut r = *self;
        r.recompute();
        Wire {
            b: r.b,
            delta_b: r.delta_b,
            isdos_minus: r.isdos_minus,
            isdos_plus: r.isdos_plus,
            fd_derivative: r.fd_derivative,
            sch_over_2pi: r.sch_over_2pi,
            sigma_contour: r.sigma_contour,
            residual_streda_fd: r.residual_streda_fd,
            residual_streda_kubo: r.residual_streda_kubo,
        }
        .serialize(s)
    }
}

/// Everything computed by [`verify_spin_streda`].
pub struct StredaOutcome {
    pub report: StredaReport,
    pub markers: MarkerDetails,
    pub gap: GapInfo,
    pub zero_limit: ZeroLimit,
}

/// Runs the three pipelines at `B1 = B2 = b`: markers of the Fermi
/// projection, the finite-difference derivative of IsDOS and the contour
/// conductivity.
pub fn verify_spin_streda(spec: &HamiltonianSpec, b: f64, delta_b: f64, opts: &StredaOptions) -> Result<StredaOutcome> {
    verify_spin_streda_with(spec, b, delta_b, opts, &DirectSolve)
}

pub fn verify_spin_streda_with(
    spec: &HamiltonianSpec,
    b: f64,
    delta_b: f64,
    opts: &StredaOptions,
    source: &dyn SpectrumSource,
) -> Result<StredaOutcome> {
    let center = solve_at_with(&spec.with_field(b), opts, source).stage("center")?;
    let markers = compute_markers(&center.projection, &center.window, MARKER_IMAG_TOL).stage("markers")?;
    // No rank check: on open samples edge levels cross E_F as B moves while
    // the bulk gap, which is what the window sees, stays open.
    let fd = streda_derivative_with(spec, b, delta_b, opts, equal_components, None, source)
        .stage("streda_derivative")?;
    let zero_limit = contour_conductivity(&center, opts.contour_nodes).stage("sigma_zero_limit")?;
    let report = StredaReport::new(&fd, markers.report.sch, zero_limit.sigma);
    Ok(StredaOutcome { report, markers, gap: center.gap, zero_limit })
}

/// Contour conductivity of a solved field point over its window.
pub fn contour_conductivity(point: &FieldPoint, nodes: usize) -> Result<ZeroLimit> {
    let contour = build_contour(&point.gap, &point.spectrum, nodes)?;
    let (p1, p2) = velocity_operators(&point.h)?;
    sigma_zero_limit(&point.h, None, &p1, &p2, &contour, &point.window)
}
