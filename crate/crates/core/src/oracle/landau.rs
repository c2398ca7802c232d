use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Closed-form values for filled Landau levels: each level holds `B/2pi`
/// states per unit area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauReference {
    pub isdos: f64,
    pub sch: f64,
}

impl LandauReference {
    /// `d IsDOS / dB`, which equals `SCh / 2pi` identically.
    pub fn isdos_derivative(&self, b: f64) -> f64 {
        if b == 0.0 {
            return self.sch / (2.0 * PI);
        }
        self.isdos / b
    }
}

/// `IsDOS = (nu_up - nu_down) B / 4pi`, `SCh = (nu_up - nu_down) / 2`.
pub fn landau_reference(b: f64, nu_up: u32, nu_down: u32) -> LandauReference {
    let dnu = nu_up as f64 - nu_down as f64;
    LandauReference { isdos: 0.5 * dnu * b / (2.0 * PI), sch: 0.5 * dnu }
}
