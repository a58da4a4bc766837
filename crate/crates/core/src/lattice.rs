//! Rank-two lattices in the complex plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LatticeError {
    #[error("lattice generators {a} and {b} are not linearly independent")]
    Degenerate { a: Complex64, b: Complex64 },
    #[error("lattice generators {a} and {b} are negatively oriented")]
    Orientation { a: Complex64, b: Complex64 },
}

/// Lattice `Z a + Z b` with an oriented basis, `Im(conj(a) b) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLattice", into = "RawLattice")]
pub struct Lattice {
    omega_a: Complex64,
    omega_b: Complex64,
    reduced: (Complex64, Complex64),
}

#[derive(Serialize, Deserialize)]
struct RawLattice {
    omega_a: [f64; 2],
    omega_b: [f64; 2],
}

impl TryFrom<RawLattice> for Lattice {
    type Error = LatticeError;

    fn try_from(raw: RawLattice) -> Result<Self, Self::Error> {
        Lattice::new(
            Complex64::new(raw.omega_a[0], raw.omega_a[1]),
            Complex64::new(raw.omega_b[0], raw.omega_b[1]),
        )
    }
}

impl From<Lattice> for RawLattice {
    fn from(l: Lattice) -> Self {
        RawLattice {
            omega_a: [l.omega_a.re, l.omega_a.im],
            omega_b: [l.omega_b.re, l.omega_b.im],
        }
    }
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    (a.conj() * b).im
}

/// Lagrange-Gauss reduction of a two-dimensional basis.
fn gauss_reduce(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (mut u, mut v) = (a, b);
    if u.norm_sqr() > v.norm_sqr() {
        std::mem::swap(&mut u, &mut v);
    }
    loop {
        let mu = ((u.conj() * v).re / u.norm_sqr()).round();
        v -= u * mu;
        if v.norm_sqr() >= u.norm_sqr() {
            return (u, v);
        }
        std::mem::swap(&mut u, &mut v);
    }
}

impl Lattice {
    pub fn new(omega_a: Complex64, omega_b: Complex64) -> Result<Self, LatticeError> {
        let c = cross(omega_a, omega_b);
        let scale = omega_a.norm() * omega_b.norm();
        if !c.is_finite() || !(scale > 0.0) || c.abs() <= 1e-14 * scale {
            return Err(LatticeError::Degenerate {
                a: omega_a,
                b: omega_b,
            });
        }
        if c < 0.0 {
            return Err(LatticeError::Orientation {
                a: omega_a,
                b: omega_b,
            });
        }
        Ok(Self {
            omega_a,
            omega_b,
            reduced: gauss_reduce(omega_a, omega_b),
        })
    }

    /// The square lattice `Z + Z i`.
    pub fn unit_square() -> Self {
        let (a, b) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
        Self {
            omega_a: a,
            omega_b: b,
            reduced: (a, b),
        }
    }

    pub fn generators(&self) -> (Complex64, Complex64) {
        (self.omega_a, self.omega_b)
    }

    /// Area of the fundamental parallelogram.
    pub fn area(&self) -> f64 {
        cross(self.omega_a, self.omega_b).abs()
    }

    /// Lattice with both generators multiplied by `c`; `c` must be non-zero.
    pub fn scaled(&self, c: f64) -> Result<Self, LatticeError> {
        Self::new(self.omega_a * c, self.omega_b * c)
    }

    /// Real coordinates `(s, t)` with `z = s a + t b`.
    pub fn coordinates(&self, z: Complex64) -> (f64, f64) {
        let det = cross(self.omega_a, self.omega_b);
        let s = cross(z, self.omega_b) / det;
        let t = cross(self.omega_a, z) / det;
        (s, t)
    }

    pub fn point(&self, m: i64, n: i64) -> Complex64 {
        self.omega_a * m as f64 + self.omega_b * n as f64
    }

    /// Representative `z'` of `z + Λ` with coordinates in `[0, 1)^2`.
    pub fn reduce_to_fundamental(&self, z: Complex64) -> Complex64 {
        let (s, t) = self.coordinates(z);
        let frac = |x: f64| {
            let f = x - x.floor();
            if f >= 1.0 {
                0.0
            } else {
                f
            }
        };
        let (fs, ft) = (frac(s), frac(t));
        // Already-reduced input comes back unchanged.
        if fs == s && ft == t {
            return z;
        }
        self.omega_a * fs + self.omega_b * ft
    }

    /// Lattice point nearest to `z` (ties resolved towards the first
    /// candidate in a fixed scan order).
    pub fn nearest_point(&self, z: Complex64) -> Complex64 {
        let (u, v) = self.reduced;
        let det = cross(u, v);
        let s = cross(z, v) / det;
        let t = cross(u, z) / det;
        let (s0, t0) = (s.floor(), t.floor());
        let mut best = u * s0 + v * t0;
        let mut best_d = (z - best).norm_sqr();
        // With a reduced basis the nearest point lies among nearby cell corners.
        for dm in -1..=2 {
            for dn in -1..=2 {
                let p = u * (s0 + dm as f64) + v * (t0 + dn as f64);
                let d = (z - p).norm_sqr();
                if d < best_d {
                    best = p;
                    best_d = d;
                }
            }
        }
        best
    }

    /// Length of a shortest non-zero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        self.reduced.0.norm()
    }
}
