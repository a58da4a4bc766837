//! Tensor-product adaptive rules on disks, annuli and lattice parallelograms.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::quadrature::{adaptive_from, QuadratureConfig};
use super::QuadratureError;
use crate::lattice::Lattice;

/// Runs an outer adaptive integral whose integrand is itself an adaptive
/// integral, remembering the first inner failure.
struct Nested {
    failure: RefCell<Option<QuadratureError>>,
}

impl Nested {
    fn new() -> Self {
        Self {
            failure: RefCell::new(None),
        }
    }

    /// Evaluates an inner integral; once one has failed, the remaining
    /// ones are skipped and contribute zero.
    fn inner<F: FnOnce() -> Result<f64, QuadratureError>>(&self, run: F) -> f64 {
        if self.failure.borrow().is_some() {
            return 0.0;
        }
        match run() {
            Ok(v) => v,
            Err(e) => {
                let mut slot = self.failure.borrow_mut();
                let value = match &e {
                    QuadratureError::NotConverged { value, .. } => *value,
                    _ => f64::NAN,
                };
                if slot.is_none() {
                    *slot = Some(e);
                }
                value
            }
        }
    }

    fn finish(self, outer: Result<f64, QuadratureError>) -> Result<f64, QuadratureError> {
        let outer = outer?;
        match self.failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(outer),
        }
    }
}

fn angular_pieces(r: f64) -> usize {
    (r.ceil() as usize).clamp(4, 4096)
}

/// Integral of `g` over the annulus `r0 <= |z| <= r1` in polar coordinates.
///
/// The angular range starts with one panel per unit of radius (at least four)
/// and the radial range with one panel per unit of width, so features of
/// size O(1) are resolved before adaptivity takes over.
pub fn integrate_annulus<G>(
    g: G,
    r0: f64,
    r1: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError>
where
    G: Fn(Complex64) -> f64,
{
    cfg.validate()?;
    if !(r0 >= 0.0 && r1 >= r0) || !r1.is_finite() {
        return Err(QuadratureError::InvalidInterval { a: r0, b: r1 });
    }
    if r1 == r0 {
        return Ok(0.0);
    }
    let area = PI * (r1 * r1 - r0 * r0);
    let inner_cfg = QuadratureConfig {
        abs_tol: 0.1 * cfg.abs_tol / area.max(1.0),
        rel_tol: 0.1 * cfg.rel_tol,
        ..*cfg
    };
    let nested = Nested::new();
    let radial = |r: f64| {
        let ring = |theta: f64| g(Complex64::from_polar(r, theta));
        r * nested.inner(|| adaptive_from(&ring, 0.0, 2.0 * PI, angular_pieces(r), &inner_cfg))
    };
    let pieces = ((r1 - r0).ceil() as usize).max(1);
    let outer = adaptive_from(&radial, r0, r1, pieces, cfg);
    nested.finish(outer)
}

/// `r ∫_0^{2π} g(r e^{iθ}) dθ`, the angular profile of a planar integral.
pub(crate) fn ring_integral<G>(g: G, r: f64, cfg: &QuadratureConfig) -> Result<f64, QuadratureError>
where
    G: Fn(Complex64) -> f64,
{
    let ring = |theta: f64| g(Complex64::from_polar(r, theta));
    adaptive_from(&ring, 0.0, 2.0 * PI, angular_pieces(r), cfg).map(|v| r * v)
}

/// Integral of `g` over the disk `|z| < radius`.
pub fn integrate_disk<G>(g: G, radius: f64, cfg: &QuadratureConfig) -> Result<f64, QuadratureError>
where
    G: Fn(Complex64) -> f64,
{
    if !(radius > 0.0) {
        return Err(QuadratureError::InvalidInterval { a: 0.0, b: radius });
    }
    integrate_annulus(g, 0.0, radius, cfg)
}

/// Integral of `g` over the fundamental parallelogram
/// `{ s a + t b : s, t in [0, 1) }` spanned by the lattice generators.
pub fn integrate_parallelogram<G>(
    g: G,
    lattice: &Lattice,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError>
where
    G: Fn(Complex64) -> f64,
{
    cfg.validate()?;
    let (a, b) = lattice.generators();
    let area = lattice.area();
    let inner_cfg = QuadratureConfig {
        abs_tol: 0.1 * cfg.abs_tol / area.max(1.0),
        rel_tol: 0.1 * cfg.rel_tol,
        ..*cfg
    };
    // Split each unit coordinate range so that panels have physical size O(1).
    let pieces_a = (a.norm().ceil() as usize).max(2);
    let pieces_b = (b.norm().ceil() as usize).max(2);
    let nested = Nested::new();
    let outer_fn = |s: f64| {
        let row = |t: f64| g(a * s + b * t);
        nested.inner(|| adaptive_from(&row, 0.0, 1.0, pieces_b, &inner_cfg))
    };
    let outer = adaptive_from(&outer_fn, 0.0, 1.0, pieces_a, &cfg.scaled_abs(1.0 / area));
    nested.finish(outer).map(|v| v * area)
}
