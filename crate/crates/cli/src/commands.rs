use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};

use serde::Serialize;
use serde_json::json;
use stredalab::model::Spin;
use stredalab::oracle::{brute_force_identities, fukui_hatsugai, spin_resolved_chern, BlochGrid, BruteForceReport, FhsReport};

use crate::cache::{self, EigenCache};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::log::RunLog;
use crate::pipeline::{self, csv_row, gapless_row, is_gap_failure, CSV_HEADER};

fn open_log(cfg: &RunConfig, name: &str) -> Result<Arc<RunLog>, CliError> {
    Ok(Arc::new(RunLog::create(&cfg.output_dir.join(name))?))
}

fn source(cfg: &RunConfig, log: &Arc<RunLog>) -> EigenCache {
    EigenCache::new(cfg.cache.then(|| cfg.cache_dir()), log.clone())
}

/// Writes `bytes` to `path` through a temporary file and a rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

pub fn run(config: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    cfg.validate(false)?;
    let log = open_log(&cfg, "run.log")?;
    log.line(&format!("run {} (cache {})", config.display(), if cfg.cache { "on" } else { "off" }));
    let src = source(&cfg, &log);
    let point = log.timed("total", || pipeline::evaluate(&cfg, cfg.model.b2, &src, &log)).map_err(|e| {
        log.line(&format!("failed: {e}"));
        CliError::from(e)
    })?;
    let mut text = serde_json::to_string_pretty(&pipeline::report_json(&point)).expect("report serializes");
    text.push('\n');
    write_atomic(&cfg.output_dir.join("report.json"), text.as_bytes())?;
    log.line("wrote report.json");
    Ok(())
}

enum Outcome {
    Row(String),
    Fatal(String),
}

pub fn sweep(config: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    cfg.validate(true)?;
    let grid = cfg.sweep.as_ref().expect("validated").grid();
    let log = open_log(&cfg, "sweep.log")?;
    log.line(&format!("sweep {} over {} field values", config.display(), grid.len()));
    let src = source(&cfg, &log);
    let mut csv = File::create(cfg.output_dir.join("sweep.csv"))?;
    csv.write_all(format!("{CSV_HEADER}\n").as_bytes())?;
    csv.flush()?;

    let digits = cfg.precision_digits;
    let cancel = AtomicBool::new(false);
    let compute = |b: f64| -> Outcome {
        if cancel.load(Ordering::Relaxed) {
            return Outcome::Fatal("cancelled".into());
        }
        match pipeline::evaluate(&cfg, b, &src, &log) {
            Ok(p) => Outcome::Row(csv_row(&p, digits)),
            Err(e) if is_gap_failure(&e) => {
                log.line(&format!("B = {b}: flagged gapless: {e}"));
                Outcome::Row(gapless_row(b, cfg.fermi_energy, digits))
            }
            Err(e) => {
                cancel.store(true, Ordering::Relaxed);
                Outcome::Fatal(format!("B = {b}: {e}"))
            }
        }
    };

    let (tx, rx) = mpsc::channel::<(usize, Outcome)>();
    let mut failure = None;
    std::thread::scope(|s| -> Result<(), CliError> {
        let grid = &grid;
        let compute = &compute;
        s.spawn(move || {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                grid.par_iter().enumerate().for_each_with(tx, |tx, (i, &b)| {
                    let _ = tx.send((i, compute(b)));
                });
            }
            #[cfg(not(feature = "parallel"))]
            for (i, &b) in grid.iter().enumerate() {
                let _ = tx.send((i, compute(b)));
            }
        });
        // Single ordered writer: rows leave in grid order, one write each.
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (i, out) in rx {
            pending.insert(i, out);
            while let Some(out) = pending.remove(&next) {
                next += 1;
                if failure.is_some() {
                    continue;
                }
                match out {
                    Outcome::Row(line) => {
                        csv.write_all(line.as_bytes())?;
                        csv.flush()?;
                    }
                    Outcome::Fatal(msg) => failure = Some(msg),
                }
            }
        }
        Ok(())
    })?;
    match failure {
        Some(msg) => {
            log.line(&format!("failed: {msg}"));
            Err(CliError::Numerical(msg))
        }
        None => {
            log.line("wrote sweep.csv");
            Ok(())
        }
    }
}

const TOL_LIOUVILLIAN: f64 = 1e-6;
const TOL_UNIQUENESS: f64 = 1e-8;
const TOL_DOUBLE_COMMUTATOR: f64 = 1e-6;
const TOL_GLOBAL_TRACE_PER_DIM: f64 = 1e-8;

fn brute_passes(r: &BruteForceReport) -> bool {
    r.liouvillian <= TOL_LIOUVILLIAN
        && r.uniqueness <= TOL_UNIQUENESS
        && r.double_commutator <= TOL_DOUBLE_COMMUTATOR
        && r.global_trace <= TOL_GLOBAL_TRACE_PER_DIM * r.dim as f64
}

/// Chern number of the lowest `r` Harper bands at flux `p/q` from
/// `r = q s + p t`, `|t| <= q/2`, in the orientation of the markers.
pub fn diophantine_chern(p: i64, q: i64, r: i64) -> Option<i64> {
    (-q / 2..=q / 2).find(|&t| (r - p * t).rem_euclid(q) == 0)
}

#[derive(Serialize)]
struct HarperCheck {
    p: i64,
    q: usize,
    bands: usize,
    expected: i64,
    fhs: Option<FhsReport>,
    error: Option<String>,
    pass: bool,
}

pub fn oracle(config: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    cfg.validate(false)?;
    let log = open_log(&cfg, "oracle.log")?;
    let oc = &cfg.oracle;
    let mut ok = true;

    let mut brute = Vec::new();
    log.timed("brute_force_identities", || -> Result<(), CliError> {
        for i in 0..oc.brute_instances {
            let dim = oc.brute_dims[i % oc.brute_dims.len()];
            let seed = i as u64 + 1;
            let r = brute_force_identities(dim, seed)?;
            let pass = brute_passes(&r);
            ok &= pass;
            log.line(&format!("brute dim {dim} seed {seed}: max residual {:.3e} {}", r.max_residual(), if pass { "ok" } else { "FAIL" }));
            brute.push(json!({ "report": r, "pass": pass }));
        }
        Ok(())
    })?;

    let mut harper = Vec::new();
    log.timed("fhs_harper", || {
        for (p, q) in [(1i64, 3usize), (1, 5), (2, 5)] {
            for bands in 1..q {
                let expected = diophantine_chern(p, q as i64, bands as i64).expect("q > 0");
                let res = BlochGrid::harper(p, q, 0.0, oc.fhs_grid, oc.fhs_grid).and_then(|g| fukui_hatsugai(&g, bands));
                let (fhs, error) = match res {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                let pass = fhs.is_some_and(|r| r.chern == expected);
                ok &= pass;
                log.line(&format!("fhs harper {p}/{q} bands {bands}: expected {expected}, got {:?}", fhs.map(|r| r.chern)));
                harper.push(HarperCheck { p, q, bands, expected, fhs, error, pass });
            }
        }
    });

    let model = log.timed("fhs_model", || match spin_resolved_chern(&cfg.model, cfg.fermi_energy, oc.fhs_grid) {
        Ok(c) => {
            log.line(&format!("fhs model: Ch_up = {}, Ch_down = {}", c[Spin::Up.index()], c[Spin::Down.index()]));
            json!({ "ch_up": c[0], "ch_down": c[1], "sch": 0.5 * (c[0] - c[1]) as f64 })
        }
        Err(e) => {
            log.line(&format!("fhs model unavailable: {e}"));
            json!({ "error": e.to_string() })
        }
    });

    let out = json!({ "pass": ok, "brute_force": brute, "fhs_harper": harper, "fhs_model": model });
    let mut text = serde_json::to_string_pretty(&out).expect("oracle report serializes");
    text.push('\n');
    write_atomic(&cfg.output_dir.join("oracle.json"), text.as_bytes())?;
    if ok {
        log.line("all oracle checks passed");
        Ok(())
    } else {
        Err(CliError::Numerical("oracle checks failed, see oracle.json".into()))
    }
}

pub fn cache_clear(dir: &Path) -> Result<(), CliError> {
    if !dir.is_dir() {
        return Err(CliError::Validation(format!("cache-clear: {} is not a directory", dir.display())));
    }
    let n = cache::clear(dir)?;
    eprintln!("removed {n} cache entries");
    Ok(())
}
