use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use stredalab::c64;
use stredalab::model::{
    build_hamiltonian, covariance_check, momentum_operators, soc_vector_potential, Backend, Boundary, Geometry,
    HamiltonianSpec, OperatorMatrix, Spin,
};
use stredalab::spectral::{eigensolve, EigenOptions};

fn continuum(l: usize, n: usize) -> HamiltonianSpec {
    HamiltonianSpec { backend: Backend::Continuum, half_width_l: l, points_per_cell: n, ..HamiltonianSpec::default() }
}

/// Largest deviation of the discrete `P1` from `-i d1 - A1` on a Gaussian,
/// over the central half of the sample.
fn momentum_error(n: usize) -> f64 {
    let spec = HamiltonianSpec {
        potential_amplitudes: [0.5, 0.3],
        soc_strength: 1.0,
        b1: 0.7,
        b2: 0.7,
        ..continuum(1, n)
    };
    let (p1, _) = momentum_operators(&spec).unwrap();
    let g = Geometry::from_spec(&spec);
    let w = 0.2;
    let f = |x: [f64; 2]| (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * w * w)).exp();
    let psi = Mat::from_fn(g.nsites(), 1, |k, _| c64::new(f(g.coords(k)), 0.0));
    let mut worst = 0.0f64;
    for s in Spin::BOTH {
        let out = p1.block(s).mul_dense(psi.as_ref());
        for k in 0..g.nsites() {
            let x = g.coords(k);
            if x[0].abs() > 0.5 || x[1].abs() > 0.5 {
                continue;
            }
            let a1 = -0.5 * spec.b2 * x[1] + soc_vector_potential(&spec, s, x)[0];
            let d1 = -x[0] / (w * w) * f(x);
            let exact = c64::new(-a1 * f(x), -d1);
            worst = worst.max((out[(k, 0)] - exact).norm());
        }
    }
    worst
}

#[test]
fn velocity_converges_to_continuum_momentum_at_second_order() {
    let coarse = momentum_error(16);
    let fine = momentum_error(32);
    let ratio = coarse / fine;
    assert!((3.0..5.0).contains(&ratio), "errors {coarse:.3e} -> {fine:.3e}, ratio {ratio:.2}");
}

#[test]
fn torus_hamiltonian_is_magnetic_covariant() {
    // Unit translations are magnetic symmetries of the torus only when
    // B times the period is a multiple of 2 pi.
    let b = 2.0 * PI / 4.0;
    let spec = HamiltonianSpec {
        potential_amplitudes: [0.3, 0.2],
        soc_strength: 0.5,
        b1: b,
        b2: b,
        boundary: Boundary::Torus,
        ..continuum(2, 6)
    };
    let h = build_hamiltonian(&spec).unwrap();
    for n in [(1, 0), (0, 1), (1, 1)] {
        let r = covariance_check(&h, &spec, n).unwrap();
        assert!(r <= 1e-10, "n = {n:?}: {r:.3e}");
    }
}

#[test]
fn broken_periodicity_is_detected() {
    let spec = HamiltonianSpec { potential_amplitudes: [0.3, 0.2], boundary: Boundary::Torus, ..continuum(2, 4) };
    let h = build_hamiltonian(&spec).unwrap();
    let mut full = h.to_full_dense();
    // A bump on one site only, not repeated in the other cells.
    full[(5, 5)] += c64::new(100.0, 0.0);
    let broken = OperatorMatrix::from_full(h.geometry().clone(), full.as_ref()).unwrap();
    let r = covariance_check(&broken, &spec, (1, 0)).unwrap();
    assert!(r > 0.1, "{r:.3e}");
}

#[test]
fn opposite_spin_fluxes_give_identical_block_spectra() {
    let spec = HamiltonianSpec { tb_spin_flux_offset: 0.2, half_width_l: 5, ..HamiltonianSpec::default() };
    let h = build_hamiltonian(&spec).unwrap();
    let s = eigensolve(&h, &EigenOptions::default()).unwrap();
    let (up, down) = (&s.block(Spin::Up).eigenvalues, &s.block(Spin::Down).eigenvalues);
    let worst = up.iter().zip(down).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-10, "{worst:.3e}");
    // Not the zero-flux spectrum.
    let free = eigensolve(&build_hamiltonian(&HamiltonianSpec { tb_spin_flux_offset: 0.0, ..spec }).unwrap(), &EigenOptions::default())
        .unwrap();
    assert!((free.block(Spin::Up).eigenvalues[0] - up[0]).abs() > 1e-3);
}

#[test]
fn torus_landau_levels_sit_at_b_times_k_plus_half() {
    // Four flux quanta through the 4 x 4 torus: each level holds four states.
    let b = PI / 2.0;
    let spec = HamiltonianSpec { b1: b, b2: b, boundary: Boundary::Torus, ..continuum(2, 8) };
    let h = build_hamiltonian(&spec).unwrap();
    let s = eigensolve(&h, &EigenOptions::default()).unwrap();
    for spin in Spin::BOTH {
        let ev = &s.block(spin).eigenvalues;
        for (k, level) in ev[..8].chunks(4).enumerate() {
            let exact = b * (k as f64 + 0.5);
            for &e in level {
                assert!((e - exact).abs() <= 0.03 * exact, "level {k}: {e} vs {exact}");
            }
        }
        assert!(ev[8] > 2.0 * b, "{}", ev[8]);
    }
}

#[test]
fn geometry_is_shared_not_copied() {
    let h = build_hamiltonian(&HamiltonianSpec::default()).unwrap();
    let (p1, p2) = momentum_operators(&HamiltonianSpec::default()).unwrap();
    assert_eq!(**h.geometry(), **p1.geometry());
    assert!(Arc::ptr_eq(p1.geometry(), p2.geometry()));
}
