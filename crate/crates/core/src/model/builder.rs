//! Hamiltonian, position, velocity and spin operators.
//!
//! Both backends use the same gauge-covariant nearest-neighbour stencil: the
//! kinetic term hops with amplitude `-t e^{-i int A.dl}` along each link,
//! where the spin-dependent vector potential is
//! `A_s = (B/2)(-x2, x1) - s (soc/4)(-d2 V, d1 V)`. Each component of `A_s`
//! depends on the transverse coordinate only, so link integrals are exact.
//! The velocity is the exact Heisenberg derivative `P_j = i[H, X_j]`.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::c64;

use super::geometry::{Geometry, Spin};
use super::operator::{Block, OperatorMatrix};
use super::spec::{Backend, HamiltonianSpec};
use crate::error::{Error, Result};
use crate::linalg::Csr;

/// `V(x) = v1 cos(2 pi x1) + v2 cos(2 pi x2)`.
pub fn potential(spec: &HamiltonianSpec, x: [f64; 2]) -> f64 {
    let [v1, v2] = spec.potential_amplitudes;
    v1 * (2.0 * PI * x[0]).cos() + v2 * (2.0 * PI * x[1]).cos()
}

/// `(d1 V, d2 V)`.
pub fn potential_gradient(spec: &HamiltonianSpec, x: [f64; 2]) -> [f64; 2] {
    let [v1, v2] = spec.potential_amplitudes;
    [-2.0 * PI * v1 * (2.0 * PI * x[0]).sin(), -2.0 * PI * v2 * (2.0 * PI * x[1]).sin()]
}

/// Spin-orbit part of the spin-resolved vector potential,
/// `-s (soc/4)(-d2 V, d1 V)` with `s = +-1`.
pub fn soc_vector_potential(spec: &HamiltonianSpec, spin: Spin, x: [f64; 2]) -> [f64; 2] {
    let g = potential_gradient(spec, x);
    let c = -spin.sign() * spec.soc_strength / 4.0;
    [c * -g[1], c * g[0]]
}

struct LinkModel<'a> {
    hop: f64,
    field: f64,
    onsite: Box<dyn Fn([f64; 2]) -> f64 + 'a>,
    vector_potential: Box<dyn Fn([f64; 2]) -> [f64; 2] + 'a>,
}

fn assemble(geom: &Geometry, m: &LinkModel<'_>, twist: [f64; 2]) -> Csr {
    let side = geom.side;
    let h = geom.spacing;
    let lt = geom.period();
    let mut trip = Vec::with_capacity(5 * geom.nsites());
    for k in 0..geom.nsites() {
        let x = geom.coords(k);
        trip.push((k, k, c64::new((m.onsite)(x), 0.0)));
        let (a, b) = geom.grid(k);
        let a_vec = (m.vector_potential)(x);
        for j in 0..2 {
            let along = if j == 0 { a } else { b };
            let (nb, wrap_phase) = if along + 1 < side {
                (if j == 0 { geom.index(a + 1, b) } else { geom.index(a, b + 1) }, 0.0)
            } else if geom.is_torus() {
                let nb = if j == 0 { geom.index(0, b) } else { geom.index(a, 0) };
                let y = geom.coords(nb);
                // psi(y + L_T e_j) = e^{i chi_j(y)} psi(y)
                let chi = if j == 0 { 0.5 * m.field * lt * y[1] } else { -0.5 * m.field * lt * y[0] };
                (nb, chi + twist[j])
            } else {
                continue;
            };
            let amp = c64::from_polar(-m.hop, -h * a_vec[j] + wrap_phase);
            trip.push((k, nb, amp));
            trip.push((nb, k, amp.conj()));
        }
    }
    Csr::from_triplets(geom.nsites(), geom.nsites(), trip)
}

pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<OperatorMatrix> {
    build_with_twist(spec, [0.0, 0.0])
}

/// Torus Hamiltonian with twisted boundary conditions: the wrap-around
/// links pick up the extra phases `theta_j`, periodic in each `theta_j` with
/// period `2 pi`.
pub fn build_twisted_hamiltonian(spec: &HamiltonianSpec, twist: [f64; 2]) -> Result<OperatorMatrix> {
    if spec.boundary != super::spec::Boundary::Torus {
        return Err(Error::InvalidSpec { field: "boundary", reason: "twisted boundary conditions need the torus".into() });
    }
    build_with_twist(spec, twist)
}

fn build_with_twist(spec: &HamiltonianSpec, twist: [f64; 2]) -> Result<OperatorMatrix> {
    match spec.backend {
        Backend::Continuum => continuum(spec, twist),
        Backend::Tightbinding => tightbinding(spec, twist),
    }
}

/// `H = (1/2) P_s^2 + V + 2 B1 g s^z` on the grid of spacing `h = 1/n`.
pub fn build_continuum_hamiltonian(spec: &HamiltonianSpec) -> Result<OperatorMatrix> {
    if spec.backend != Backend::Continuum {
        return Err(Error::InvalidSpec { field: "backend", reason: "expected continuum".into() });
    }
    continuum(spec, [0.0, 0.0])
}

fn continuum(spec: &HamiltonianSpec, twist: [f64; 2]) -> Result<OperatorMatrix> {
    spec.validate()?;
    let geom = Arc::new(Geometry::from_spec(spec));
    let h = geom.spacing;
    let blocks = Spin::BOTH.map(|spin| {
        let zeeman = 2.0 * spec.b1 * spec.zeeman_coupling * spin.sz();
        let model = LinkModel {
            hop: 0.5 / (h * h),
            field: spec.b2,
            onsite: Box::new(move |x| 2.0 / (h * h) + potential(spec, x) + zeeman),
            vector_potential: Box::new(move |x| {
                let soc = soc_vector_potential(spec, spin, x);
                [-0.5 * spec.b2 * x[1] + soc[0], 0.5 * spec.b2 * x[0] + soc[1]]
            }),
        };
        Block::Sparse(assemble(&geom, &model, twist))
    });
    let [up, down] = blocks;
    OperatorMatrix::new(geom, up, down)
}

/// Square-lattice hopping `-1` with spin-dependent Peierls flux
/// `2 pi (flux + s offset) + B2` per plaquette and on-site Zeeman splitting.
pub fn build_tightbinding_hamiltonian(spec: &HamiltonianSpec) -> Result<OperatorMatrix> {
    if spec.backend != Backend::Tightbinding {
        return Err(Error::InvalidSpec { field: "backend", reason: "expected tightbinding".into() });
    }
    tightbinding(spec, [0.0, 0.0])
}

fn tightbinding(spec: &HamiltonianSpec, twist: [f64; 2]) -> Result<OperatorMatrix> {
    spec.validate()?;
    let geom = Arc::new(Geometry::from_spec(spec));
    let blocks = Spin::BOTH.map(|spin| {
        let phi = spec.sector_field(spin.sign());
        let zeeman = 2.0 * spec.b1 * spec.zeeman_coupling * spin.sz();
        let model = LinkModel {
            hop: 1.0,
            field: phi,
            onsite: Box::new(move |_| zeeman),
            vector_potential: Box::new(move |x| [-0.5 * phi * x[1], 0.5 * phi * x[0]]),
        };
        Block::Sparse(assemble(&geom, &model, twist))
    });
    let [up, down] = blocks;
    OperatorMatrix::new(geom, up, down)
}

/// Diagonal position operators; undefined on the torus.
pub fn position_operators(geometry: &Arc<Geometry>) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if geometry.is_torus() {
        return Err(Error::PositionOnTorus);
    }
    let make = |j: usize| {
        let d: Vec<c64> = (0..geometry.nsites()).map(|k| c64::new(geometry.coords(k)[j], 0.0)).collect();
        let b = Block::Sparse(Csr::diagonal(&d));
        OperatorMatrix::new(geometry.clone(), b.clone(), b)
    };
    Ok((make(0)?, make(1)?))
}

/// `P_j = i[H, X_j]`, with kernel `i (y_j - x_j) H(x, y)` (minimal image on
/// the torus).
pub fn velocity_operators(h: &OperatorMatrix) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let geom = h.geometry().clone();
    let make = |j: usize| -> Result<OperatorMatrix> {
        let blocks = Spin::BOTH.map(|s| {
            let trip = h
                .block(s)
                .entries()
                .into_iter()
                .map(|(x, y, v)| (x, y, c64::new(0.0, geom.displacement(x, y)[j]) * v))
                .collect();
            Block::Sparse(Csr::from_triplets(geom.nsites(), geom.nsites(), trip))
        });
        let [up, down] = blocks;
        OperatorMatrix::new(geom.clone(), up, down)
    };
    Ok((make(0)?, make(1)?))
}

/// Velocity operators of the Hamiltonian described by `spec`.
pub fn momentum_operators(spec: &HamiltonianSpec) -> Result<(OperatorMatrix, OperatorMatrix)> {
    velocity_operators(&build_hamiltonian(spec)?)
}

/// `S^z = 1 (x) s^z`.
pub fn spin_operator(geometry: &Arc<Geometry>) -> OperatorMatrix {
    let n = geometry.nsites();
    let make = |s: Spin| Block::Sparse(Csr::diagonal(&vec![c64::new(s.sz(), 0.0); n]));
    OperatorMatrix::new(geometry.clone(), make(Spin::Up), make(Spin::Down)).expect("sizes match")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, hermitian_eigen};
    use crate::model::Boundary;

    fn continuum(l: usize, n: usize) -> HamiltonianSpec {
        HamiltonianSpec { backend: Backend::Continuum, half_width_l: l, points_per_cell: n, ..Default::default() }
    }

    #[test]
    fn free_torus_ground_state_is_zero_and_blocks_identical() {
        let spec = HamiltonianSpec { boundary: Boundary::Torus, ..continuum(1, 16) };
        let h = build_hamiltonian(&spec).unwrap();
        let up = h.block(Spin::Up).to_dense();
        let down = h.block(Spin::Down).to_dense();
        assert_eq!(up, down);
        let (vals, _) = hermitian_eigen(up.as_ref()).unwrap();
        assert!(vals[0].abs() < 1e-10, "{}", vals[0]);
    }

    #[test]
    fn zeeman_shift_is_exactly_two_b() {
        let b = 0.7;
        let spec = HamiltonianSpec { b1: b, zeeman_coupling: 1.0, ..continuum(1, 4) };
        let h = build_hamiltonian(&spec).unwrap();
        let (up, _) = hermitian_eigen(h.block(Spin::Up).to_dense().as_ref()).unwrap();
        let (down, _) = hermitian_eigen(h.block(Spin::Down).to_dense().as_ref()).unwrap();
        for (u, d) in up.iter().zip(&down) {
            assert!((u - d - 2.0 * b).abs() < 1e-10);
        }
    }

    #[test]
    fn hermitian_with_soc_and_field() {
        let spec = HamiltonianSpec {
            potential_amplitudes: [1.0, 1.0],
            soc_strength: 1.0,
            b2: 0.3,
            ..continuum(2, 12)
        };
        let h = build_hamiltonian(&spec).unwrap();
        assert!(h.hermiticity_residual() <= 1e-12);
    }

    #[test]
    fn tight_binding_free_band_within_minus_four_four() {
        let spec = HamiltonianSpec { half_width_l: 3, ..Default::default() };
        let h = build_hamiltonian(&spec).unwrap();
        let (vals, _) = hermitian_eigen(h.block(Spin::Up).to_dense().as_ref()).unwrap();
        assert!(vals[0] > -4.0 && *vals.last().unwrap() < 4.0);
        // open 6x6 square: -2 (cos(pi/7) + cos(pi/7))
        let expected = -4.0 * (PI / 7.0).cos();
        assert!((vals[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn position_refused_on_torus() {
        let spec = HamiltonianSpec { boundary: Boundary::Torus, ..Default::default() };
        let g = Arc::new(Geometry::from_spec(&spec));
        assert!(matches!(position_operators(&g), Err(Error::PositionOnTorus)));
    }

    #[test]
    fn velocity_is_heisenberg_derivative() {
        let spec = HamiltonianSpec { b2: 0.4, tb_spin_flux_offset: 0.1, half_width_l: 2, ..Default::default() };
        let h = build_hamiltonian(&spec).unwrap();
        let (x1, _) = position_operators(h.geometry()).unwrap();
        let (p1, _) = velocity_operators(&h).unwrap();
        let direct = h.commutator(&x1).unwrap().scale(linalg::I);
        let diff = p1.sub(&direct).unwrap();
        assert!(diff.max_abs() < 1e-13);
        let _ = spin_operator(h.geometry());
    }
}
