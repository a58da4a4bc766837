//! Weierstrass ℘ on a lattice and the equianharmonic elliptic Brody curve.
//!
//! The extremal curve is the elliptic function with
//! `(f')^2 = K (f^3 - 1/sqrt 8)`, `K = π sqrt 8`, period lattice
//! `Z(2ω₁) ⊕ Z(2ω₂)` with `ω₂ = ω₁ e^{iπ/3}`, sending `0, ω₁, ω₂` to
//! `1/sqrt 2, ∞, e^{2πi/3}/sqrt 2`. We evaluate it as
//!
//! ```text
//! f(z) = (4/K) ℘(z - ω₁; g₂ = 0, g₃ = K³ / (16 sqrt 8))
//! ```
//!
//! Substituting into the differential equation and matching coefficients
//! gives `g₃ = π³/2`; the critical values, the pole at `ω₁`, periodicity and
//! the ODE residual are all checked when the curve is built.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::Lattice;
use crate::numerics::{integrate_1d, QuadratureConfig, QuadratureError, SingularitySubstitution};

pub use crate::lattice::LatticeError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EllipticError {
    #[error("℘ has a pole at {z}: distance {distance:e} to the lattice is below the pole guard")]
    Pole { z: Complex64, distance: f64 },
    #[error("series order {0} is below the minimum of 10")]
    SeriesOrder(usize),
    #[error("extremal curve validation failed: {check} residual {residual:e} exceeds {limit:e}")]
    Construction {
        check: &'static str,
        residual: f64,
        limit: f64,
    },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("elliptic integral: {0}")]
    Quadrature(#[from] QuadratureError),
}

/// Weierstrass ℘ with invariants `g2`, `g3` on `lattice`.
///
/// Evaluation reduces the argument to the nearest lattice point and sums
/// the Laurent expansion there, halving the argument and applying the
/// duplication formula while it lies outside `reduction_radius`.
#[derive(Debug, Clone)]
pub struct WeierstrassP {
    lattice: Lattice,
    g2: Complex64,
    g3: Complex64,
    series_order: usize,
    reduction_radius: f64,
    pole_guard: f64,
    coeffs: Vec<Complex64>,
}

fn laurent_coefficients(g2: Complex64, g3: Complex64, order: usize) -> Vec<Complex64> {
    // c[k] multiplies w^(2k-2); c[0], c[1] unused.
    let mut c = vec![Complex64::new(0.0, 0.0); order + 1];
    if order >= 2 {
        c[2] = g2 / 20.0;
    }
    if order >= 3 {
        c[3] = g3 / 28.0;
    }
    for k in 4..=order {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 2..=k - 2 {
            acc += c[m] * c[k - m];
        }
        c[k] = acc * (3.0 / ((2 * k + 1) as f64 * (k - 3) as f64));
    }
    c
}

impl WeierstrassP {
    pub const DEFAULT_SERIES_ORDER: usize = 40;

    pub fn new(lattice: Lattice, g2: Complex64, g3: Complex64) -> Self {
        let shortest = lattice.shortest_vector();
        let order = Self::DEFAULT_SERIES_ORDER;
        Self {
            lattice,
            g2,
            g3,
            series_order: order,
            reduction_radius: 0.5 * shortest,
            pole_guard: 1e-6 * shortest,
            coeffs: laurent_coefficients(g2, g3, order),
        }
    }

    /// Override the series truncation and the duplication threshold.
    pub fn with_series(
        mut self,
        series_order: usize,
        reduction_radius: f64,
    ) -> Result<Self, EllipticError> {
        if series_order < 10 {
            return Err(EllipticError::SeriesOrder(series_order));
        }
        self.series_order = series_order;
        self.reduction_radius = reduction_radius;
        self.coeffs = laurent_coefficients(self.g2, self.g3, series_order);
        Ok(self)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn invariants(&self) -> (Complex64, Complex64) {
        (self.g2, self.g3)
    }

    pub fn series_order(&self) -> usize {
        self.series_order
    }

    pub fn reduction_radius(&self) -> f64 {
        self.reduction_radius
    }

    pub fn pole_guard(&self) -> f64 {
        self.pole_guard
    }

    /// `(w^2 ℘(w), w^3 ℘'(w))` from the truncated Laurent series; both are
    /// regular at `w = 0`.
    pub(crate) fn scaled_series(&self, w: Complex64) -> (Complex64, Complex64) {
        let u = w * w;
        let mut s = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for k in (2..=self.series_order).rev() {
            s = s * u + self.coeffs[k];
            d = d * u + self.coeffs[k] * (2 * k - 2) as f64;
        }
        // Horner above produced sums over u^(k-2); two more powers of u.
        let u2 = u * u;
        (
            Complex64::new(1.0, 0.0) + s * u2,
            Complex64::new(-2.0, 0.0) + d * u2,
        )
    }

    /// ℘ and ℘' at a point already translated next to a lattice point.
    fn eval_local(&self, w: Complex64) -> (Complex64, Complex64) {
        let mut halvings = 0;
        let mut v = w;
        while v.norm() > self.reduction_radius && halvings < 60 {
            v *= 0.5;
            halvings += 1;
        }
        let (s, d) = self.scaled_series(v);
        let mut p = s / (v * v);
        let mut dp = d / (v * v * v);
        for _ in 0..halvings {
            // Tangent line at (p, dp) on y^2 = 4x^3 - g2 x - g3.
            let slope = (p * p * 6.0 - self.g2 * 0.5) / dp;
            let p2 = slope * slope * 0.25 - p * 2.0;
            let dp2 = -(dp + slope * (p2 - p));
            p = p2;
            dp = dp2;
        }
        (p, dp)
    }

    /// Offset of `z` from its nearest lattice point.
    pub fn local_offset(&self, z: Complex64) -> Complex64 {
        z - self.lattice.nearest_point(z)
    }

    /// `(℘(z), ℘'(z))`.
    pub fn eval(&self, z: Complex64) -> Result<(Complex64, Complex64), EllipticError> {
        let w = self.local_offset(z);
        let distance = w.norm();
        if distance < self.pole_guard {
            return Err(EllipticError::Pole { z, distance });
        }
        Ok(self.eval_local(w))
    }

    /// `|℘'^2 - (4℘^3 - g2 ℘ - g3)| / (1 + |℘|^3)` at `z`.
    pub fn ode_residual(&self, z: Complex64) -> Result<f64, EllipticError> {
        let (p, dp) = self.eval(z)?;
        let rhs = p * p * p * 4.0 - self.g2 * p - self.g3;
        Ok((dp * dp - rhs).norm() / (1.0 + p.norm().powi(3)))
    }

    /// Largest `|℘'|` at the three half-periods, relative to `1 + |℘|^{3/2}`.
    /// Zero exactly when `(g2, g3)` belong to the stored lattice.
    pub fn lattice_mismatch(&self) -> f64 {
        let (a, b) = self.lattice.generators();
        [a * 0.5, b * 0.5, (a + b) * 0.5]
            .iter()
            .map(|&h| {
                // Series centred at the origin, not the reduced point.
                let (p, dp) = self.eval_local(h);
                dp.norm() / (1.0 + p.norm().powf(1.5))
            })
            .fold(0.0, f64::max)
    }
}

/// Value of the extremal curve in whichever chart is numerically safe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CurveValue {
    /// `f(z)` and `f'(z)`.
    Finite { f: Complex64, df: Complex64 },
    /// Reciprocal chart near a pole: `1/f(z)` and `(1/f)'(z)`.
    PoleChart { g: Complex64, dg: Complex64 },
}

impl CurveValue {
    /// `|df|^2 = |f'|^2 / (π (1 + |f|^2)^2)`, same formula in either chart.
    pub fn spherical_derivative_sq(&self) -> f64 {
        let (v, dv) = match *self {
            CurveValue::Finite { f, df } => (f, df),
            CurveValue::PoleChart { g, dg } => (g, dg),
        };
        let denom = 1.0 + v.norm_sqr();
        dv.norm_sqr() / (PI * denom * denom)
    }

    /// `f(z)`, or `None` exactly at a pole.
    pub fn value(&self) -> Option<Complex64> {
        match *self {
            CurveValue::Finite { f, .. } => Some(f),
            CurveValue::PoleChart { g, .. } => {
                if g == Complex64::new(0.0, 0.0) {
                    None
                } else {
                    Some(g.inv())
                }
            }
        }
    }
}

/// Above this modulus of `f` the reciprocal chart is used.
pub const CHART_SWITCH: f64 = 1e3;

/// Tolerance for the construction-time validation checks.
pub const VALIDATION_LIMIT: f64 = 1e-6;

/// The equianharmonic elliptic Brody curve with `sup |df| = 1`.
#[derive(Debug, Clone)]
pub struct ExtremalBrodyCurve {
    k: f64,
    elliptic_integral: f64,
    omega1: f64,
    omega2: Complex64,
    lattice: Lattice,
    wp: WeierstrassP,
    critical_values: [Complex64; 3],
}

/// Validation residuals recorded at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstructionChecks {
    pub value_at_origin: f64,
    pub value_at_omega2: f64,
    pub pole_at_omega1: f64,
    pub critical_points: f64,
    pub lattice_mismatch: f64,
}

impl ConstructionChecks {
    pub fn max(&self) -> f64 {
        [
            self.value_at_origin,
            self.value_at_omega2,
            self.pole_at_omega1,
            self.critical_points,
            self.lattice_mismatch,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `∫_1^∞ dx / sqrt(x^3 - 1)`.
pub fn cubic_elliptic_integral(cfg: &QuadratureConfig) -> Result<f64, QuadratureError> {
    let cfg = cfg.with_substitution(SingularitySubstitution::AlgebraicEndpoint);
    // (x^3 - 1) = (x - 1)(x^2 + x + 1) keeps precision near x = 1.
    integrate_1d(
        |x: f64| 1.0 / ((x - 1.0) * (x * x + x + 1.0)).sqrt(),
        1.0,
        f64::INFINITY,
        &cfg,
    )
}

impl ExtremalBrodyCurve {
    /// Build the curve, computing `ω₁ = 2^{1/4} K^{-1/2} ∫_1^∞ dx/sqrt(x^3-1)`
    /// by quadrature, and validate it.
    pub fn build(cfg: &QuadratureConfig) -> Result<Self, EllipticError> {
        let integral = cubic_elliptic_integral(cfg)?;
        Self::from_elliptic_integral(integral)
    }

    /// Build from a known value of `∫_1^∞ dx/sqrt(x^3-1)`.
    pub fn from_elliptic_integral(integral: f64) -> Result<Self, EllipticError> {
        let curve = Self::assemble(integral)?;
        let checks = curve.construction_checks();
        let named = [
            ("f(0) = e1", checks.value_at_origin),
            ("f(omega2) = e2", checks.value_at_omega2),
            ("pole at omega1", checks.pole_at_omega1),
            ("f' = 0 at critical points", checks.critical_points),
            ("invariants match lattice", checks.lattice_mismatch),
        ];
        for (check, residual) in named {
            if !(residual <= VALIDATION_LIMIT) {
                return Err(EllipticError::Construction {
                    check,
                    residual,
                    limit: VALIDATION_LIMIT,
                });
            }
        }
        Ok(curve)
    }

    fn assemble(integral: f64) -> Result<Self, EllipticError> {
        let k = PI * 8f64.sqrt();
        let omega1 = 2f64.powf(0.25) / k.sqrt() * integral;
        let rot = Complex64::from_polar(1.0, PI / 3.0);
        let omega2 = rot * omega1;
        let lattice = Lattice::new(Complex64::new(2.0 * omega1, 0.0), omega2 * 2.0)?;
        let g3 = k.powi(3) / (16.0 * 8f64.sqrt());
        let wp = WeierstrassP::new(lattice, Complex64::new(0.0, 0.0), Complex64::new(g3, 0.0));
        let critical_values = [
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::from_polar(FRAC_1_SQRT_2, 2.0 * PI / 3.0),
            Complex64::from_polar(FRAC_1_SQRT_2, 4.0 * PI / 3.0),
        ];
        Ok(Self {
            k,
            elliptic_integral: integral,
            omega1,
            omega2,
            lattice,
            wp,
            critical_values,
        })
    }

    pub fn construction_checks(&self) -> ConstructionChecks {
        let origin = self.eval(Complex64::new(0.0, 0.0));
        let at_omega2 = self.eval(self.omega2);
        let at_pole = self.eval(Complex64::new(self.omega1, 0.0));
        let value_dist = |v: CurveValue, target: Complex64| match v {
            CurveValue::Finite { f, .. } => (f - target).norm(),
            CurveValue::PoleChart { .. } => f64::INFINITY,
        };
        let pole_residual = match at_pole {
            CurveValue::PoleChart { g, .. } => g.norm(),
            CurveValue::Finite { .. } => f64::INFINITY,
        };
        // Critical points Zω₁ + Zω₂ other than the pole: 0, ω₂, ω₁ + ω₂.
        let critical = [
            Complex64::new(0.0, 0.0),
            self.omega2,
            self.omega2 + self.omega1,
        ]
        .iter()
        .map(|&z| match self.eval(z) {
            CurveValue::Finite { df, .. } => df.norm(),
            CurveValue::PoleChart { dg, .. } => dg.norm(),
        })
        .fold(0.0, f64::max);
        ConstructionChecks {
            value_at_origin: value_dist(origin, self.critical_values[0]),
            value_at_omega2: value_dist(at_omega2, self.critical_values[1]),
            pole_at_omega1: pole_residual,
            critical_points: critical,
            lattice_mismatch: self.wp.lattice_mismatch(),
        }
    }

    /// The constant `K` in `(f')^2 = K (f^3 - 1/sqrt 8)`; equal to `π sqrt 8`.
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn elliptic_integral(&self) -> f64 {
        self.elliptic_integral
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> Complex64 {
        self.omega2
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn weierstrass(&self) -> &WeierstrassP {
        &self.wp
    }

    /// The three finite critical values `e^{2πij/3} / sqrt 2`.
    pub fn critical_values(&self) -> [Complex64; 3] {
        self.critical_values
    }

    /// `f(z)` and `f'(z)`, switching to the reciprocal chart when `|f| > 10^3`.
    pub fn eval(&self, z: Complex64) -> CurveValue {
        let scale = 4.0 / self.k;
        let w = self.wp.local_offset(z - self.omega1);
        if w.norm() <= 0.1 * self.wp.reduction_radius() {
            let (s, d) = self.wp.scaled_series(w);
            let w2 = w * w;
            // |f| = scale |s| / |w|^2
            if scale * s.norm() > CHART_SWITCH * w2.norm() {
                // 1/f = w^2 / (scale s), (1/f)' = -w d / (scale s^2)
                return CurveValue::PoleChart {
                    g: w2 / (s * scale),
                    dg: -(w * d) / (s * s * scale),
                };
            }
            return CurveValue::Finite {
                f: s / w2 * scale,
                df: d / (w2 * w) * scale,
            };
        }
        let (p, dp) = self.wp.eval_local(w);
        CurveValue::Finite {
            f: p * scale,
            df: dp * scale,
        }
    }

    /// `|df|^2` at `z`.
    pub fn spherical_derivative_sq(&self, z: Complex64) -> f64 {
        self.eval(z).spherical_derivative_sq()
    }

    /// `|df|` at `z`.
    pub fn spherical_derivative(&self, z: Complex64) -> f64 {
        self.spherical_derivative_sq(z).sqrt()
    }

    /// `|df|` from `|df|^2 = (K/π) |f^3 - 1/sqrt 8| / (1 + |f|^2)^2`, which
    /// avoids `f'` altogether.
    pub fn spherical_derivative_from_values(&self, z: Complex64) -> f64 {
        let c = 1.0 / 8f64.sqrt();
        let sq = match self.eval(z) {
            CurveValue::Finite { f, .. } => {
                let denom = 1.0 + f.norm_sqr();
                self.k / PI * (f * f * f - c).norm() / (denom * denom)
            }
            CurveValue::PoleChart { g, .. } => {
                // multiply through by |g|^4 with f = 1/g
                let denom = 1.0 + g.norm_sqr();
                self.k / PI * g.norm() * (Complex64::new(1.0, 0.0) - g * g * g * c).norm()
                    / (denom * denom)
            }
        };
        sq.sqrt()
    }

    /// `|(f')^2 - K (f^3 - 1/sqrt 8)| / (1 + |f|^3)`, or the equivalent
    /// identity `(g')^2 = K (g - g^4/sqrt 8)` in the reciprocal chart.
    pub fn ode_residual(&self, z: Complex64) -> f64 {
        let c = 1.0 / 8f64.sqrt();
        match self.eval(z) {
            CurveValue::Finite { f, df } => {
                (df * df - (f * f * f - c) * self.k).norm() / (1.0 + f.norm().powi(3))
            }
            CurveValue::PoleChart { g, dg } => {
                let g4 = g * g * g * g;
                (dg * dg - (g - g4 * c) * self.k).norm() / (1.0 + g.norm())
            }
        }
    }
}
