use serde_json::{Map, Value};
use stredalab::error::StageExt;
use stredalab::markers::{compute_markers, MARKER_IMAG_TOL, R2_GAPLESS};
use stredalab::response::{
    contour_conductivity, equal_components, solve_at_with, streda_derivative_with, SpectrumSource, ZeroLimit,
};
use stredalab::{EigenOptions, Error, GapInfo, MarkerReport, StredaOptions, StredaReport, CODE_VERSION};

use crate::config::RunConfig;
use crate::log::RunLog;

/// Everything computed at one field value.
#[derive(Debug, Clone)]
pub struct Point {
    pub b: f64,
    pub fermi: f64,
    pub gap: GapInfo,
    pub markers: MarkerReport,
    pub streda: StredaReport,
    pub zero_limit: ZeroLimit,
}

pub fn options(cfg: &RunConfig) -> StredaOptions {
    StredaOptions {
        fermi: cfg.fermi_energy,
        contour_nodes: cfg.contour_nodes,
        window: cfg.window.clone(),
        eigen: EigenOptions::partial(cfg.fermi_energy),
    }
}

/// The three Středa pipelines at `b`, each stage timed in `log`.
pub fn evaluate(cfg: &RunConfig, b: f64, source: &dyn SpectrumSource, log: &RunLog) -> stredalab::Result<Point> {
    let opts = options(cfg);
    let spec = cfg.model.with_field(b);
    let tag = |stage: &str| format!("{stage} (B = {b})");
    let center = log.timed(&tag("center"), || solve_at_with(&spec, &opts, source)).stage("center")?;
    let markers = log
        .timed(&tag("markers"), || compute_markers(&center.projection, &center.window, MARKER_IMAG_TOL))
        .stage("markers")?;
    let fd = log
        .timed(&tag("streda_derivative"), || {
            streda_derivative_with(&cfg.model, b, cfg.delta_b, &opts, equal_components, None, source)
        })
        .stage("streda_derivative")?;
    let zero_limit = log
        .timed(&tag("sigma_zero_limit"), || contour_conductivity(&center, opts.contour_nodes))
        .stage("sigma_zero_limit")?;
    let streda = StredaReport::new(&fd, markers.report.sch, zero_limit.sigma);
    Ok(Point { b, fermi: cfg.fermi_energy, gap: center.gap, markers: markers.report, streda, zero_limit })
}

/// Errors that mean "no gap at this field" rather than a broken run.
pub fn is_gap_failure(e: &Error) -> bool {
    matches!(
        e.root(),
        Error::GapClosed { .. }
            | Error::FermiInSpectrum { .. }
            | Error::FermiAboveComputed { .. }
            | Error::DegenerateGap(_)
    )
}

fn merge(into: &mut Map<String, Value>, v: Value) {
    if let Value::Object(m) = v {
        into.extend(m);
    }
}

/// Flat JSON object holding the marker and Středa report fields plus the
/// gap and run identification.
pub fn report_json(p: &Point) -> Value {
    let mut m = Map::new();
    merge(&mut m, serde_json::to_value(&p.markers).expect("marker report serializes"));
    merge(&mut m, serde_json::to_value(p.streda).expect("Středa report serializes"));
    m.insert("E_F".into(), p.fermi.into());
    m.insert("gap_lower".into(), p.gap.gap_lower.into());
    m.insert("gap_upper".into(), p.gap.gap_upper.into());
    m.insert("rank_below".into(), p.gap.rank_below.into());
    m.insert("sigma_contour_imag".into(), p.zero_limit.sigma_imag.into());
    m.insert("code_version".into(), CODE_VERSION.into());
    Value::Object(m)
}

pub const CSV_HEADER: &str = "B,E_F,gap_lower,gap_upper,rank_below,isdos,fd_derivative,ch_up,ch_down,sch,sigma_contour,residual_streda_fd,residual_streda_kubo,gapped_flag";

/// `x` with `digits` significant digits.
pub fn fmt_float(x: f64, digits: usize) -> String {
    if x.is_finite() {
        format!("{:.*e}", digits.saturating_sub(1), x)
    } else {
        format!("{x}")
    }
}

/// One CSV line, newline included.
pub fn csv_row(p: &Point, digits: usize) -> String {
    let s = &p.streda;
    let floats = [
        p.gap.gap_lower,
        p.gap.gap_upper,
    ];
    let after = [
        p.markers.isdos,
        s.fd_derivative,
        p.markers.ch_up,
        p.markers.ch_down,
        p.markers.sch,
        s.sigma_contour,
        s.residual_streda_fd,
        s.residual_streda_kubo,
    ];
    let mut cells = vec![fmt_float(p.b, digits), fmt_float(p.fermi, digits)];
    cells.extend(floats.iter().map(|&x| fmt_float(x, digits)));
    cells.push(p.gap.rank_below.to_string());
    cells.extend(after.iter().map(|&x| fmt_float(x, digits)));
    // A kernel that does not decay means the bulk gap has closed.
    let gapped = p.markers.decay_fit_r2 >= R2_GAPLESS;
    cells.push(if gapped { "1" } else { "0" }.into());
    cells.join(",") + "\n"
}

/// Row of a field value where the gap around `E_F` is closed.
pub fn gapless_row(b: f64, fermi: f64, digits: usize) -> String {
    let mut cells = vec![fmt_float(b, digits), fmt_float(fermi, digits)];
    cells.extend(std::iter::repeat("NaN".to_string()).take(11));
    cells.push("0".into());
    cells.join(",") + "\n"
}
