use stredalab::faer::Mat;
use stredalab::linalg::{frobenius, identity};
use stredalab::model::{build_hamiltonian, position_operators};
use stredalab::spectral::{
    detect_gap, eigensolve, fermi_projection, offdiagonal_part, riesz_apply, riesz_projection, Contour, Resolvent,
};
use stredalab::{c64, Boundary, EigenOptions, Error, HamiltonianSpec, OperatorMatrix, Spectrum, Spin};

fn hofstadter(boundary: Boundary, l: usize) -> (HamiltonianSpec, OperatorMatrix, Spectrum) {
    let spec = HamiltonianSpec { half_width_l: l, boundary, tb_spin_flux_offset: 1.0 / 3.0, ..HamiltonianSpec::default() };
    let h = build_hamiltonian(&spec).unwrap();
    let s = eigensolve(&h, &EigenOptions::default()).unwrap();
    (spec, h, s)
}

#[test]
fn lowest_hofstadter_band_holds_a_third_of_the_states() {
    let (_, h, s) = hofstadter(Boundary::Torus, 3);
    let n = h.geometry().nsites();
    let g = detect_gap(&s, -1.4).unwrap();
    assert_eq!(g.rank_per_spin, [n / 3, n / 3]);
    assert!(g.gap_lower < -1.4 && g.gap_upper > -1.4 && g.width() > 0.1, "{g:?}");
}

#[test]
fn fermi_energy_on_an_eigenvalue_is_rejected() {
    let (_, _, s) = hofstadter(Boundary::Torus, 3);
    let e = detect_gap(&s, s.eigenvalues()[5]).unwrap_err();
    assert!(matches!(e, Error::FermiInSpectrum { .. }));
    assert!(e.to_string().contains("detect_gap"));
}

#[test]
fn fermi_projection_limits() {
    let (_, h, s) = hofstadter(Boundary::Dirichlet, 3);
    let n = h.geometry().nsites();
    let ev = s.eigenvalues();
    let below = fermi_projection(&s, &detect_gap(&s, ev[0] - 1.0).unwrap()).unwrap();
    assert_eq!(below.rank(Spin::Up) + below.rank(Spin::Down), 0.0);
    let above = fermi_projection(&s, &detect_gap(&s, ev[ev.len() - 1] + 1.0).unwrap()).unwrap();
    for spin in Spin::BOTH {
        assert!(frobenius((above.matrix(spin) - identity(n)).as_ref()) < 1e-10);
    }
    let g = detect_gap(&s, -1.4).unwrap();
    let p = fermi_projection(&s, &g).unwrap();
    assert!((p.rank(Spin::Up) + p.rank(Spin::Down) - g.rank_below as f64).abs() < 1e-10);
}

#[test]
fn riesz_over_an_empty_region_is_zero() {
    let (_, h, _) = hofstadter(Boundary::Dirichlet, 3);
    let n = h.geometry().nsites();
    let far = Contour::circle(c64::new(-30.0, 0.0), 2.0, 64).unwrap();
    let r = riesz_apply(&h, &far, Spin::Up, identity(n).as_ref()).unwrap();
    assert!(frobenius(r.as_ref()) < 1e-12);
    let p = riesz_projection(&h, &Contour::empty()).unwrap();
    assert_eq!(p.rank(Spin::Up) + p.rank(Spin::Down), 0.0);
}

#[test]
fn resolvent_norm_is_inverse_distance() {
    let (_, h, s) = hofstadter(Boundary::Dirichlet, 3);
    let w = c64::new(-1.4, 0.3);
    let r = Resolvent::new(&h, w).unwrap();
    for spin in Spin::BOTH {
        let b = s.block(spin);
        let rv = r.apply(spin, b.eigenvectors.as_ref());
        // R is diagonal in the eigenbasis, so its norm is the largest 1 / |lambda - w|.
        let mut largest = 0.0f64;
        for (k, &l) in b.eigenvalues.iter().enumerate() {
            let col = Mat::from_fn(rv.nrows(), 1, |i, _| rv[(i, k)]);
            let expected = 1.0 / (c64::new(l, 0.0) - w).norm();
            assert!((frobenius(col.as_ref()) - expected).abs() < 1e-10 * expected);
            largest = largest.max(expected);
        }
        let dist = b.eigenvalues.iter().map(|&l| (c64::new(l, 0.0) - w).norm()).fold(f64::INFINITY, f64::min);
        assert!((largest - 1.0 / dist).abs() < 1e-12);
    }
}

#[test]
fn offdiagonal_part_properties() {
    let (_, h, s) = hofstadter(Boundary::Dirichlet, 3);
    let p = fermi_projection(&s, &detect_gap(&s, -1.4).unwrap()).unwrap();
    assert!(offdiagonal_part(&h, &p).unwrap().max_abs() < 1e-10);

    let (x1, _) = position_operators(h.geometry()).unwrap();
    let c = x1.commutator(&p.to_operator()).unwrap();
    let c_od = offdiagonal_part(&c, &p).unwrap();
    assert!(c_od.sub(&c).unwrap().max_abs() < 1e-10);

    // A^D + A^OD = A for an arbitrary A.
    let a = x1.mul(&h).unwrap();
    let pi = p.to_operator();
    let q = OperatorMatrix::identity(h.geometry().clone()).sub(&pi).unwrap();
    let diag = pi.mul(&a).unwrap().mul(&pi).unwrap().add(&q.mul(&a).unwrap().mul(&q).unwrap()).unwrap();
    let od = offdiagonal_part(&a, &p).unwrap();
    assert!(diag.add(&od).unwrap().sub(&a).unwrap().max_abs() < 1e-10);
}
