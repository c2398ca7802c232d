//! Discretized Bloch–Landau–Pauli Hamiltonians and the operators built
//! alongside them.

pub mod builder;
pub mod covariance;
pub mod geometry;
pub mod operator;
pub mod spec;

pub use builder::{
    build_continuum_hamiltonian, build_hamiltonian, build_twisted_hamiltonian, build_tightbinding_hamiltonian, momentum_operators,
    position_operators, potential, potential_gradient, soc_vector_potential, spin_operator, velocity_operators,
};
pub use covariance::covariance_check;
pub use geometry::{Geometry, Spin};
pub use operator::{Block, OperatorMatrix};
pub use spec::{landau_demo_fermi, landau_demo_field, Backend, Boundary, HamiltonianSpec, TB_DEMO_FERMI};
