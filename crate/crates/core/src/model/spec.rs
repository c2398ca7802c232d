use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Continuum,
    Tightbinding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Torus,
}

/// Declarative model description. Both backends share the field and spin
/// parameters; `potential_amplitudes` and `points_per_cell` only affect the
/// continuum backend, the two `tb_*` fields only the tight-binding one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub backend: Backend,
    /// `(v1, v2)` in `V(x) = v1 cos(2 pi x1) + v2 cos(2 pi x2)`.
    pub potential_amplitudes: [f64; 2],
    pub soc_strength: f64,
    /// Coefficient `g` of the Zeeman term `2 B1 g S^z`.
    pub zeeman_coupling: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    pub half_width_l: usize,
    pub points_per_cell: usize,
    pub boundary: Boundary,
    /// Flux per plaquette in units of `2 pi`.
    pub tb_flux_per_plaquette: f64,
    /// Spin-dependent flux `+offset` (up) and `-offset` (down), units of `2 pi`.
    pub tb_spin_flux_offset: f64,
}

impl Default for HamiltonianSpec {
    fn default() -> Self {
        HamiltonianSpec {
            backend: Backend::Tightbinding,
            potential_amplitudes: [0.0, 0.0],
            soc_strength: 0.0,
            zeeman_coupling: 0.0,
            b1: 0.0,
            b2: 0.0,
            half_width_l: 4,
            points_per_cell: 8,
            boundary: Boundary::Dirichlet,
            tb_flux_per_plaquette: 0.0,
            tb_spin_flux_offset: 0.0,
        }
    }
}

const QUANTIZATION_TOL: f64 = 1e-9;

impl HamiltonianSpec {
    /// Same spec with `B1 = B2 = b`.
    pub fn with_field(&self, b: f64) -> Self {
        HamiltonianSpec { b1: b, b2: b, ..self.clone() }
    }

    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        HamiltonianSpec { boundary, ..self.clone() }
    }

    /// Torus period `2L`.
    pub fn period(&self) -> f64 {
        2.0 * self.half_width_l as f64
    }

    /// Flux per unit area seen by one spin sector (continuum: `B2`;
    /// tight-binding: flux per plaquette including the spin offset and `B2`).
    pub fn sector_field(&self, spin_sign: f64) -> f64 {
        match self.backend {
            Backend::Continuum => self.b2,
            Backend::Tightbinding => {
                2.0 * PI * (self.tb_flux_per_plaquette + spin_sign * self.tb_spin_flux_offset) + self.b2
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("potential_amplitudes", self.potential_amplitudes[0]),
            ("potential_amplitudes", self.potential_amplitudes[1]),
            ("soc_strength", self.soc_strength),
            ("zeeman_coupling", self.zeeman_coupling),
            ("B1", self.b1),
            ("B2", self.b2),
            ("tb_flux_per_plaquette", self.tb_flux_per_plaquette),
            ("tb_spin_flux_offset", self.tb_spin_flux_offset),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidSpec { field, reason: format!("must be finite, got {v}") });
            }
        }
        if self.half_width_l < 1 {
            return Err(Error::InvalidSpec { field: "half_width_l", reason: "must be >= 1".into() });
        }
        if self.backend == Backend::Continuum && self.points_per_cell < 4 {
            return Err(Error::InvalidSpec {
                field: "points_per_cell",
                reason: format!("must be >= 4 for the continuum backend, got {}", self.points_per_cell),
            });
        }
        if self.boundary == Boundary::Torus {
            let area = self.period() * self.period();
            let sectors: &[(&'static str, f64)] = match self.backend {
                Backend::Continuum => &[("B2", 1.0)],
                Backend::Tightbinding => &[("spin up", 1.0), ("spin down", -1.0)],
            };
            for &(sector, sign) in sectors {
                let quanta = self.sector_field(sign) * area / (2.0 * PI);
                if (quanta - quanta.round()).abs() > QUANTIZATION_TOL {
                    return Err(Error::FluxNotQuantized { sector, flux_quanta: quanta });
                }
            }
        }
        Ok(())
    }

    /// Continuum Landau-level fixture: `V` small, Zeeman split so that only
    /// the spin-up lowest Landau level lies below `E_F = B/2`.
    pub fn landau_demo() -> Self {
        let b = landau_demo_field();
        HamiltonianSpec {
            backend: Backend::Continuum,
            potential_amplitudes: [0.02, 0.02],
            soc_strength: 1.0,
            zeeman_coupling: -0.5,
            b1: b,
            b2: b,
            half_width_l: 4,
            points_per_cell: 12,
            boundary: Boundary::Dirichlet,
            tb_flux_per_plaquette: 0.0,
            tb_spin_flux_offset: 0.0,
        }
    }

    /// Tight-binding spin-flux fixture on a 30 x 30 open sample.
    pub fn tb_spin_flux_demo() -> Self {
        HamiltonianSpec {
            backend: Backend::Tightbinding,
            half_width_l: 15,
            boundary: Boundary::Dirichlet,
            tb_spin_flux_offset: 1.0 / 3.0,
            ..HamiltonianSpec::default()
        }
    }
}

/// Field of the Landau fixture: sixteen flux quanta through the `8 x 8` box,
/// so the magnetic length `B^{-1/2}` is well below the window buffer.
pub fn landau_demo_field() -> f64 {
    2.0 * PI * 16.0 / 64.0
}

/// Fermi energy of the Landau fixture, halfway between the two lowest levels.
pub fn landau_demo_fermi() -> f64 {
    landau_demo_field() / 2.0
}

/// Fermi energy inside the lowest gap of the flux-1/3 Hofstadter spectrum.
pub const TB_DEMO_FERMI: f64 = -1.4;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_grids_and_nonfinite_values() {
        let mut s = HamiltonianSpec::landau_demo();
        s.points_per_cell = 3;
        assert!(matches!(s.validate(), Err(Error::InvalidSpec { field: "points_per_cell", .. })));
        let mut s = HamiltonianSpec::landau_demo();
        s.potential_amplitudes[0] = f64::NAN;
        assert!(matches!(s.validate(), Err(Error::InvalidSpec { field: "potential_amplitudes", .. })));
        let mut s = HamiltonianSpec::default();
        s.half_width_l = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn torus_flux_quantization() {
        let mut s = HamiltonianSpec::landau_demo().with_boundary(Boundary::Torus);
        assert!(s.validate().is_ok());
        s.b2 *= 1.01;
        assert!(matches!(s.validate(), Err(Error::FluxNotQuantized { .. })));

        let mut t = HamiltonianSpec { boundary: Boundary::Torus, half_width_l: 3, ..Default::default() };
        t.tb_flux_per_plaquette = 1.0 / 3.0;
        assert!(t.validate().is_ok());
        t.tb_spin_flux_offset = 0.1;
        assert!(matches!(t.validate(), Err(Error::FluxNotQuantized { sector: "spin up", .. })));
    }

    #[test]
    fn serde_uses_spec_field_names() {
        let v = serde_json::to_value(HamiltonianSpec::default()).unwrap();
        for key in ["backend", "potential_amplitudes", "B1", "B2", "half_width_l", "tb_spin_flux_offset"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["backend"], "tightbinding");
    }
}
