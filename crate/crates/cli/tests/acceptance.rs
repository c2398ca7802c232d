//! Acceptance criteria, one PASS/FAIL line each. Tolerances are fixed here;
//! a failing criterion fails the target.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use stredalab::faer::Mat;
use stredalab::linalg::{frobenius, unit_columns};
use stredalab::markers::{compute_markers, time_reversal_check, MarkerReport, MARKER_IMAG_TOL};
use stredalab::model::spec::{landau_demo_fermi, TB_DEMO_FERMI};
use stredalab::oracle::{brute_force_identities, spin_resolved_chern};
use stredalab::response::{
    contour_conductivity, solve_at, verify_spin_streda, FieldPoint, KuboEvaluator, KuboParams, StredaOutcome,
};
use stredalab::spectral::{build_contour, riesz_apply};
use stredalab::{c64, Backend, Boundary, HamiltonianSpec, Spin, StredaOptions};

type Outcome = Result<(bool, String), String>;

struct Fixture {
    name: &'static str,
    spec: HamiltonianSpec,
    fermi: f64,
    /// Model on which the Fukui–Hatsugai numbers are computed.
    fhs_spec: HamiltonianSpec,
}

fn tb_demo() -> Fixture {
    let spec = HamiltonianSpec::tb_spin_flux_demo();
    Fixture { name: "tb-spin-flux-1/3", fhs_spec: spec.clone(), spec, fermi: TB_DEMO_FERMI }
}

fn fixtures() -> Vec<Fixture> {
    // Spin-independent flux 1/3 with a Zeeman splitting that empties the
    // lowest up band: Ch = (0, 1), SCh = -1/2.
    let zeeman = HamiltonianSpec {
        tb_flux_per_plaquette: 1.0 / 3.0,
        zeeman_coupling: 1.5,
        b1: 1.0,
        half_width_l: 12,
        ..HamiltonianSpec::default()
    };
    let quarter = HamiltonianSpec { tb_spin_flux_offset: 0.25, half_width_l: 12, ..HamiltonianSpec::default() };
    let landau = HamiltonianSpec { points_per_cell: 6, ..HamiltonianSpec::landau_demo() };
    let landau_torus = HamiltonianSpec { half_width_l: 2, boundary: Boundary::Torus, ..landau.clone() };
    vec![
        tb_demo(),
        Fixture { name: "tb-flux-1/3-zeeman", fhs_spec: zeeman.clone(), spec: zeeman, fermi: -2.8 },
        Fixture { name: "tb-spin-flux-1/4", fhs_spec: quarter.clone(), spec: quarter, fermi: -1.8 },
        Fixture { name: "continuum-landau-n6", spec: landau, fhs_spec: landau_torus, fermi: landau_demo_fermi() },
    ]
}

fn solve(f: &Fixture) -> Result<FieldPoint, String> {
    solve_at(&f.spec, &StredaOptions::new(f.fermi)).map_err(|e| format!("{}: {e}", f.name))
}

fn markers(p: &FieldPoint) -> Result<MarkerReport, String> {
    compute_markers(&p.projection, &p.window, MARKER_IMAG_TOL).map(|m| m.report).map_err(|e| e.to_string())
}

fn three_way(spec: &HamiltonianSpec, fermi: f64) -> Result<(StredaOutcome, Duration), String> {
    let t = Instant::now();
    let out = verify_spin_streda(spec, spec.b2, 1e-3, &StredaOptions::new(fermi)).map_err(|e| e.to_string())?;
    Ok((out, t.elapsed()))
}

fn three_way_check(label: &str, spec: &HamiltonianSpec, fermi: f64, landau: bool) -> Outcome {
    let (out, dt) = three_way(spec, fermi)?;
    let r = out.report;
    let scale = r.sch_over_2pi.abs().max(1.0);
    let spread = r.max_pairwise();
    let mut pass = spread <= 5e-2 * scale && dt <= Duration::from_secs(600);
    let mut detail = format!(
        "{label}: fd {:.6} SCh/2pi {:.6} sigma {:.6}, max pairwise {spread:.2e} (tol {:.2e}), {:.1}s",
        r.fd_derivative,
        r.sch_over_2pi,
        r.sigma_contour,
        5e-2 * scale,
        dt.as_secs_f64()
    );
    if landau {
        let target = 1.0 / (4.0 * PI);
        let worst = [r.fd_derivative, r.sch_over_2pi, r.sigma_contour]
            .iter()
            .map(|v| (v - target).abs() / target)
            .fold(0.0, f64::max);
        pass &= worst <= 0.05;
        detail += &format!(", worst relative deviation from 1/4pi {worst:.2e}");
    }
    Ok((pass, detail))
}

fn streda_landau() -> Outcome {
    three_way_check("Landau demo", &HamiltonianSpec::landau_demo(), landau_demo_fermi(), true)
}

fn streda_tb() -> Outcome {
    let f = tb_demo();
    three_way_check("TB demo", &f.spec, f.fermi, false)
}

fn quantization() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for f in fixtures() {
        let p = solve(&f)?;
        let m = markers(&p)?;
        let fhs = spin_resolved_chern(&f.fhs_spec, f.fermi, 6).map_err(|e| format!("{}: FHS: {e}", f.name))?;
        let int_res = (m.ch_up - m.ch_up.round()).abs().max((m.ch_down - m.ch_down.round()).abs());
        let half_res = (m.sch - (2.0 * m.sch).round() / 2.0).abs();
        let fhs_res = (m.ch_up - fhs[0] as f64).abs().max((m.ch_down - fhs[1] as f64).abs());
        let ok = int_res <= 1e-2 && half_res <= 1e-2 && fhs_res <= 5e-2;
        pass &= ok;
        parts.push(format!(
            "{} Ch=({:.4},{:.4}) FHS=({},{}) SCh={:.4} [{}]",
            f.name,
            m.ch_up,
            m.ch_down,
            fhs[0],
            fhs[1],
            m.sch,
            if ok { "ok" } else { "off" }
        ));
    }
    Ok((pass, parts.join("; ")))
}

fn time_reversal() -> Outcome {
    let f = tb_demo();
    let p = solve(&f)?;
    let tr = time_reversal_check(&f.spec, &p.projection, &p.window).map_err(|e| e.to_string())?;
    let sch_int = (tr.sch - tr.sch.round()).abs();
    let pass = tr.operator_residual <= 1e-10 && tr.chern_sum <= 1e-6 && sch_int <= 1e-2;
    Ok((
        pass,
        format!(
            "operator residual {:.2e}, |Ch_up + Ch_down| {:.2e}, SCh {:.6} (distance to integer {sch_int:.2e})",
            tr.operator_residual, tr.chern_sum, tr.sch
        ),
    ))
}

fn riesz_vs_spectral() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    let mut parts = Vec::new();
    for f in fixtures() {
        let p = solve(&f)?;
        let contour = build_contour(&p.gap, &p.spectrum, 128).map_err(|e| e.to_string())?;
        let e: Mat<c64> = unit_columns(p.h.geometry().nsites(), &p.window.sites);
        let (mut diff, mut idem) = (0.0f64, 0.0f64);
        for s in Spin::BOTH {
            let r = riesz_apply(&p.h, &contour, s, e.as_ref()).map_err(|e| e.to_string())?;
            let exact = p.projection.apply(s, e.as_ref());
            diff = diff.max(frobenius((&r - &exact).as_ref()));
            let rr = riesz_apply(&p.h, &contour, s, r.as_ref()).map_err(|e| e.to_string())?;
            idem = idem.max(frobenius((&rr - &r).as_ref()));
        }
        worst = (worst.0.max(diff), worst.1.max(idem));
        parts.push(format!("{} {diff:.1e}/{idem:.1e}", f.name));
    }
    Ok((worst.0 <= 1e-8 && worst.1 <= 1e-8, format!("riesz-spectral/idempotency on window columns: {}", parts.join(", "))))
}

fn lemma_suite() -> Outcome {
    let t = Instant::now();
    let dims = [20, 50, 100, 150, 200];
    let mut worst = [0.0f64; 4];
    for i in 0..20 {
        let dim = dims[i % dims.len()];
        let r = brute_force_identities(dim, i as u64 + 1).map_err(|e| e.to_string())?;
        worst[0] = worst[0].max(r.liouvillian);
        worst[1] = worst[1].max(r.uniqueness);
        worst[2] = worst[2].max(r.double_commutator);
        worst[3] = worst[3].max(r.global_trace / dim as f64);
    }
    let dt = t.elapsed();
    let pass = worst[0] <= 1e-6
        && worst[1] <= 1e-8
        && worst[2] <= 1e-6
        && worst[3] <= 1e-8
        && dt <= Duration::from_secs(120);
    Ok((
        pass,
        format!(
            "20 instances: liouvillian {:.1e}, uniqueness {:.1e}, double commutator {:.1e}, global trace/dim {:.1e}, {:.1}s",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            dt.as_secs_f64()
        ),
    ))
}

fn kubo_limit() -> Outcome {
    let f = tb_demo();
    let p = solve(&f)?;
    let sigma0 = contour_conductivity(&p, 128).map_err(|e| e.to_string())?.sigma;
    // Same default bulk window as the contour evaluation.
    let ev = KuboEvaluator::new(&f.spec, Some(p.window.clone())).map_err(|e| e.to_string())?;
    let mut diffs = Vec::new();
    for t in [1e-1, 1e-2, 1e-3] {
        let k = ev.eval(&KuboParams::along_path(t, f.fermi)).map_err(|e| e.to_string())?;
        diffs.push((k.sigma - c64::new(sigma0, 0.0)).norm());
    }
    let monotone = diffs.windows(2).all(|w| w[1] < w[0]);
    let pass = diffs[2] <= 5e-2 && monotone;
    Ok((
        pass,
        format!(
            "|kubo - sigma_0| along t = 1e-1, 1e-2, 1e-3: {:.2e}, {:.2e}, {:.2e} (sigma_0 = {sigma0:.6})",
            diffs[0], diffs[1], diffs[2]
        ),
    ))
}

fn kernel_decay() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for f in fixtures() {
        let p = solve(&f)?;
        let d = compute_markers(&p.projection, &p.window, MARKER_IMAG_TOL).map_err(|e| e.to_string())?.decay;
        let ok = d.r2 >= 0.9 && d.alpha > 0.0 && !d.gapless;
        pass &= ok;
        parts.push(format!("{} r2 {:.3} alpha {:.3}", f.name, d.r2, d.alpha));
    }
    // Free electron gas: no gap, oscillating kernel.
    let metal = HamiltonianSpec {
        backend: Backend::Continuum,
        half_width_l: 4,
        points_per_cell: 6,
        ..HamiltonianSpec::default()
    };
    let p = solve(&Fixture { name: "free-gas", fhs_spec: metal.clone(), spec: metal, fermi: 3.0001 })?;
    let d = compute_markers(&p.projection, &p.window, MARKER_IMAG_TOL).map_err(|e| e.to_string())?.decay;
    let control = d.r2 < 0.5 && d.gapless;
    parts.push(format!("gapless control r2 {:.3} flagged {}", d.r2, d.gapless));
    Ok((pass && control, parts.join(", ")))
}

fn plateau_sweep() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("plateau.toml");
    std::fs::write(
        &cfg,
        format!(
            "fermi_energy = {TB_DEMO_FERMI}\noutput_dir = \"out\"\n\n[model]\nbackend = \"tightbinding\"\nhalf_width_l = 15\ntb_spin_flux_offset = {}\n\n[sweep]\nB_start = 0.0\nB_end = 0.02\nsteps = 11\n",
            1.0 / 3.0
        ),
    )
    .map_err(|e| e.to_string())?;
    let status = Command::new(env!("CARGO_BIN_EXE_stredalab"))
        .args(["sweep", cfg.to_str().unwrap()])
        .stderr(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Ok((false, format!("sweep exited with {status}")));
    }
    plateau_from_csv(&dir.path().join("out/sweep.csv"))
}

fn plateau_from_csv(path: &Path) -> Outcome {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty csv")?.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).ok_or(format!("missing column {name}"));
    let (sch_col, flag_col) = (col("sch")?, col("gapped_flag")?);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let gapped: Vec<f64> = rows.iter().filter(|r| r[flag_col] == "1").map(|r| r[sch_col].parse().unwrap()).collect();
    let (lo, hi) = gapped.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let pass = rows.len() == 11 && gapped.len() == 11 && hi - lo <= 1e-2;
    Ok((pass, format!("{} rows, {} gapped, sch in [{lo:.6}, {hi:.6}], spread {:.2e}", rows.len(), gapped.len(), hi - lo)))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("three-way spin Streda, Landau demo", streda_landau),
        ("three-way spin Streda, TB demo", streda_tb),
        ("quantization on gapped fixtures", quantization),
        ("time reversal at B = 0", time_reversal),
        ("Riesz vs spectral projection", riesz_vs_spectral),
        ("lemma suite on random instances", lemma_suite),
        ("Kubo limit", kubo_limit),
        ("kernel decay", kernel_decay),
        ("plateau sweep", plateau_sweep),
    ];
    let only: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (name, f) in criteria {
        if only.as_deref().is_some_and(|o| !name.contains(o)) {
            continue;
        }
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let (pass, detail) = match res {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{} {name}: {detail} [{:.1}s]", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
