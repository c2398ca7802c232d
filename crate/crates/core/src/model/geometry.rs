use super::spec::{Backend, Boundary, HamiltonianSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    /// `+1` for up, `-1` for down.
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    /// Eigenvalue of `s^z`.
    pub fn sz(self) -> f64 {
        0.5 * self.sign()
    }

    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Square grid of sites inside `(-L, L]^2`.
///
/// Site `(a, b)` (with `0 <= a, b < side`) sits at
/// `(-L + spacing (a + 1), -L + spacing (b + 1))` and has index `a + side * b`.
/// Open continuum samples drop the boundary lines `x_j = +-L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub backend: Backend,
    pub boundary: Boundary,
    pub half_width: usize,
    pub spacing: f64,
    pub side: usize,
    /// Converts matrix elements into integral-kernel values (`h^2` or 1).
    pub kernel_scale: f64,
    /// Grid points per unit length (`n`, or 1 on the lattice).
    pub points_per_cell: usize,
}

impl Geometry {
    pub fn from_spec(spec: &HamiltonianSpec) -> Self {
        let l = spec.half_width_l;
        let (ppc, spacing) = match spec.backend {
            Backend::Continuum => (spec.points_per_cell, 1.0 / spec.points_per_cell as f64),
            Backend::Tightbinding => (1, 1.0),
        };
        let full = 2 * l * ppc;
        let side = match (spec.backend, spec.boundary) {
            (Backend::Continuum, Boundary::Dirichlet) => full - 1,
            _ => full,
        };
        Geometry {
            backend: spec.backend,
            boundary: spec.boundary,
            half_width: l,
            spacing,
            side,
            kernel_scale: spacing * spacing,
            points_per_cell: ppc,
        }
    }

    pub fn nsites(&self) -> usize {
        self.side * self.side
    }

    pub fn is_torus(&self) -> bool {
        self.boundary == Boundary::Torus
    }

    pub fn period(&self) -> f64 {
        2.0 * self.half_width as f64
    }

    pub fn index(&self, a: usize, b: usize) -> usize {
        a + self.side * b
    }

    pub fn grid(&self, k: usize) -> (usize, usize) {
        (k % self.side, k / self.side)
    }

    pub fn coord_1d(&self, a: usize) -> f64 {
        -(self.half_width as f64) + self.spacing * (a as f64 + 1.0)
    }

    pub fn coords(&self, k: usize) -> [f64; 2] {
        let (a, b) = self.grid(k);
        [self.coord_1d(a), self.coord_1d(b)]
    }

    /// Grid index of a coordinate on the lattice, if it is a site.
    pub fn index_1d(&self, x: f64) -> Option<usize> {
        let t = (x + self.half_width as f64) / self.spacing - 1.0;
        let r = t.round();
        if (t - r).abs() > 1e-6 || r < 0.0 || r >= self.side as f64 {
            None
        } else {
            Some(r as usize)
        }
    }

    /// Displacement `y - x`, using the minimal image on the torus.
    pub fn displacement(&self, x: usize, y: usize) -> [f64; 2] {
        let (cx, cy) = (self.coords(x), self.coords(y));
        let mut d = [cy[0] - cx[0], cy[1] - cx[1]];
        if self.is_torus() {
            let p = self.period();
            for dj in d.iter_mut() {
                *dj -= p * (*dj / p).round();
            }
        }
        d
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        let d = self.displacement(x, y);
        d[0].hypot(d[1])
    }

    /// Edges of the sample region in each direction: grid points are at
    /// least `spacing/2` inside on the lattice and exactly at distance
    /// `spacing` from the deleted boundary in the continuum.
    pub fn sample_bounds(&self) -> (f64, f64) {
        let l = self.half_width as f64;
        match self.backend {
            Backend::Continuum => (-l, l),
            Backend::Tightbinding => (-l + 0.5, l + 0.5),
        }
    }
}
