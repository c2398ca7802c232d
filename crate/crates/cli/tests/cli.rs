use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const REPORT_KEYS: [&str; 8] = [
    "isdos",
    "ch_up",
    "ch_down",
    "sch",
    "fd_derivative",
    "sigma_contour",
    "residual_streda_fd",
    "residual_streda_kubo",
];

const HEADER: &str = "B,E_F,gap_lower,gap_upper,rank_below,isdos,fd_derivative,ch_up,ch_down,sch,sigma_contour,residual_streda_fd,residual_streda_kubo,gapped_flag";

fn stredalab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stredalab")).args(args).env("STREDALAB_THREADS", "1").output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

/// Small flux-1/3 lattice with opposite spin fluxes.
fn tb_config(extra: &str) -> String {
    format!(
        "fermi_energy = -1.4\noutput_dir = \"out\"\n{extra}\n[model]\nbackend = \"tightbinding\"\nhalf_width_l = 7\ntb_spin_flux_offset = 0.3333333333333333\n"
    )
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_every_report_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &tb_config(""));
    let o = stredalab(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("out/report.json")).unwrap()).unwrap();
    for k in REPORT_KEYS {
        assert!(report[k].is_f64(), "missing {k}: {report}");
    }
    assert!(dir.path().join("out/run.log").exists());
}

#[test]
fn cached_rerun_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &tb_config("cache = true"));
    let first = stredalab(&["run", cfg.to_str().unwrap()]);
    assert!(first.status.success(), "{}", stderr(&first));
    let report = fs::read(dir.path().join("out/report.json")).unwrap();
    let second = stredalab(&["run", cfg.to_str().unwrap()]);
    assert!(second.status.success(), "{}", stderr(&second));
    assert!(stderr(&second).contains("cache hit"), "{}", stderr(&second));
    assert_eq!(report, fs::read(dir.path().join("out/report.json")).unwrap());

    let cleared = stredalab(&["cache-clear", dir.path().join("out").to_str().unwrap()]);
    assert!(cleared.status.success(), "{}", stderr(&cleared));
    let third = stredalab(&["run", cfg.to_str().unwrap()]);
    assert!(!stderr(&third).contains("cache hit"));
}

#[test]
fn fermi_energy_on_an_eigenvalue_exits_3() {
    let dir = TempDir::new().unwrap();
    // The spin-degenerate free lattice with an odd side has a level at zero.
    let body = "fermi_energy = 0.0\noutput_dir = \"out\"\n[model]\nbackend = \"tightbinding\"\nhalf_width_l = 4\n";
    let cfg = write_config(dir.path(), body);
    let o = stredalab(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("detect_gap"), "{}", stderr(&o));
}

#[test]
fn unknown_key_exits_2_before_compute() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &tb_config("fermi_energi = 1.0"));
    let o = stredalab(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fermi_energi"), "{}", stderr(&o));
    assert!(!dir.path().join("out/report.json").exists());

    let cfg = write_config(dir.path(), &tb_config("delta_B = -1.0"));
    assert_eq!(stredalab(&["run", cfg.to_str().unwrap()]).status.code(), Some(2));
    let cfg = write_config(dir.path(), &tb_config("[model.extra]\nx = 1"));
    assert_eq!(stredalab(&["run", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn sweep_writes_one_row_per_step() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &tb_config("precision_digits = 6\n[sweep]\nB_start = 0.02\nB_end = 0.0\nsteps = 5"),
    );
    let o = stredalab(&["sweep", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert!(text.ends_with('\n'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], HEADER);
    let bs: Vec<f64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(bs.windows(2).all(|w| w[0] < w[1]), "{bs:?}");
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), 14, "{l}");
        // Six significant digits in scientific notation.
        let sch = l.split(',').nth(9).unwrap();
        assert_eq!(sch.split('e').next().unwrap().trim_start_matches('-').len(), 7, "{sch}");
    }
}

#[test]
fn oracle_passes_on_small_instances() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &tb_config("[oracle]\nbrute_dims = [8, 16]\nbrute_instances = 3\nfhs_grid = 6"));
    let o = stredalab(&["oracle", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("out/oracle.json")).unwrap()).unwrap();
    assert!(out.is_object());
}

#[test]
fn bad_thread_count_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &tb_config(""));
    let o = Command::new(env!("CARGO_BIN_EXE_stredalab"))
        .args(["run", cfg.to_str().unwrap()])
        .env("STREDALAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
