use std::f64::consts::PI;

use stredalab::c64;
use stredalab::model::spec::TB_DEMO_FERMI;
use stredalab::model::velocity_operators;
use stredalab::response::{
    contour_conductivity, sigma_zero_limit, solve_at, streda_derivative, streda_derivative_with, verify_spin_streda,
    DirectSolve, KuboEvaluator, KuboParams,
};
use stredalab::spectral::{build_contour, Contour};
use stredalab::{Backend, Boundary, HamiltonianSpec, StredaOptions};

fn tb(l: usize) -> HamiltonianSpec {
    HamiltonianSpec { half_width_l: l, ..HamiltonianSpec::tb_spin_flux_demo() }
}

fn frozen(spec: &HamiltonianSpec, _b: f64) -> HamiltonianSpec {
    spec.clone()
}

#[test]
fn field_independent_model_has_zero_derivative() {
    let opts = StredaOptions::new(TB_DEMO_FERMI);
    let d = streda_derivative_with(&tb(6), 0.0, 1e-3, &opts, frozen, None, &DirectSolve).unwrap();
    assert!(d.fd_derivative.abs() <= 1e-10, "{d:?}");
}

#[test]
fn central_difference_converges_at_second_order() {
    let spec = tb(12);
    let opts = StredaOptions::new(TB_DEMO_FERMI);
    let fd: Vec<f64> =
        [4e-3, 2e-3, 1e-3].iter().map(|&d| streda_derivative(&spec, 0.0, d, &opts).unwrap().fd_derivative).collect();
    let first = (fd[1] - fd[0]).abs();
    let second = (fd[2] - fd[1]).abs();
    assert!(second <= first / 3.0, "{fd:?}");
}

#[test]
fn tb_demo_derivative_is_one_over_two_pi() {
    let d = streda_derivative(&HamiltonianSpec::tb_spin_flux_demo(), 0.0, 1e-3, &StredaOptions::new(TB_DEMO_FERMI))
        .unwrap();
    assert!((d.fd_derivative - 1.0 / (2.0 * PI)).abs() <= 1e-2, "{d:?}");
}

#[test]
fn gapped_demo_contour_matches_spin_chern_marker() {
    let out = verify_spin_streda(&tb(12), 0.0, 1e-3, &StredaOptions::new(TB_DEMO_FERMI)).unwrap();
    let r = out.report;
    let scale = r.sch_over_2pi.abs().max(1.0);
    assert!((r.sigma_contour - r.sch_over_2pi).abs() <= 1e-2 * scale, "{r:?}");
    assert!(out.zero_limit.sigma_imag.abs() <= 1e-6);
    // sigma^z is half the difference of the block charge conductivities.
    let [up, down] = out.zero_limit.per_block;
    assert_eq!(out.zero_limit.sigma, 0.5 * (up - down));
}

#[test]
fn sandwiched_and_direct_contour_forms_agree() {
    let spec = HamiltonianSpec { boundary: Boundary::Torus, half_width_l: 6, ..tb(6) };
    let p = solve_at(&spec, &StredaOptions::new(TB_DEMO_FERMI)).unwrap();
    assert!(2 * p.h.geometry().nsites() <= 2000);
    let contour = build_contour(&p.gap, &p.spectrum, 128).unwrap();
    let (p1, p2) = velocity_operators(&p.h).unwrap();
    let z = sigma_zero_limit(&p.h, Some(&p.projection), &p1, &p2, &contour, &p.window).unwrap();
    let sw = z.sandwiched.unwrap();
    assert!((z.sigma - sw).abs() <= 1e-6, "{z:?}");
}

#[test]
fn empty_contour_gives_zero_conductivity() {
    let p = solve_at(&tb(6), &StredaOptions::new(TB_DEMO_FERMI)).unwrap();
    let (p1, p2) = velocity_operators(&p.h).unwrap();
    let far = Contour::circle(c64::new(-20.0, 0.0), 1.0, 64).unwrap();
    let z = sigma_zero_limit(&p.h, None, &p1, &p2, &far, &p.window).unwrap();
    assert!(z.sigma.abs() <= 1e-10, "{z:?}");
}

#[test]
fn spin_balanced_landau_levels_cancel() {
    // No Zeeman term and no spin-orbit coupling: both blocks fill the
    // lowest Landau level.
    let b = PI / 2.0;
    let spec = HamiltonianSpec {
        backend: Backend::Continuum,
        b1: b,
        b2: b,
        half_width_l: 4,
        points_per_cell: 4,
        ..HamiltonianSpec::default()
    };
    let p = solve_at(&spec, &StredaOptions::new(b)).unwrap();
    assert_eq!(p.gap.rank_per_spin[0], p.gap.rank_per_spin[1]);
    let z = contour_conductivity(&p, 128).unwrap();
    assert!(z.sigma.abs() <= 5e-2, "{z:?}");
}

#[test]
fn kubo_with_nothing_occupied_is_zero() {
    let ev = KuboEvaluator::new(&tb(6), None).unwrap();
    let k = ev.eval(&KuboParams::along_path(1e-3, -10.0)).unwrap();
    assert!(k.sigma.norm() <= 1e-10 && k.sigma_volume.norm() <= 1e-10, "{k:?}");
}

#[test]
fn kubo_spin_conductivity_is_half_the_block_difference() {
    let ev = KuboEvaluator::new(&tb(6), None).unwrap();
    let k = ev.eval(&KuboParams::along_path(1e-2, TB_DEMO_FERMI)).unwrap();
    assert_eq!(k.sigma, 0.5 * (k.per_block[0] - k.per_block[1]));
}

#[test]
fn kubo_approaches_contour_limit() {
    let spec = tb(12);
    let p = solve_at(&spec, &StredaOptions::new(TB_DEMO_FERMI)).unwrap();
    let sigma0 = contour_conductivity(&p, 128).unwrap().sigma;
    let ev = KuboEvaluator::new(&spec, Some(p.window.clone())).unwrap();
    let diffs: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&t| (ev.eval(&KuboParams::along_path(t, TB_DEMO_FERMI)).unwrap().sigma - c64::new(sigma0, 0.0)).norm())
        .collect();
    assert!(diffs[0] > diffs[1] && diffs[1] > diffs[2], "{diffs:?}");
    assert!(diffs[2] <= 5e-2, "{diffs:?}");
}

#[test]
fn equilibrium_current_vanishes() {
    let ev = KuboEvaluator::new(&tb(10), None).unwrap();
    let j = ev.equilibrium_current(TB_DEMO_FERMI, 1e-2);
    assert!(j.norm() <= 1e-8 * ev.dimension() as f64, "{j}");
}

#[test]
fn kubo_rejects_mu_on_an_eigenvalue() {
    let ev = KuboEvaluator::new(&tb(4), None).unwrap();
    let mu = ev.eigenvalues(stredalab::Spin::Up)[3];
    assert!(ev.eval(&KuboParams::along_path(1e-2, mu)).is_err());
}
