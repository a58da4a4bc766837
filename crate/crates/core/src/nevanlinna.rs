//! Energy integrals, the Shimizu-Ahlfors characteristic
//! `T(r, f) = ∫_1^r dt/t ∫_{|z|<t} |df|^2`, and mean energy of Brody curves.
//!
//! Every curve is seen through its energy density `|df|^2`, so constant,
//! extremal and rescaled curves share the same operations.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elliptic::ExtremalBrodyCurve;
use crate::lattice::{Lattice, LatticeError};
use crate::numerics::{
    integrate_disk, integrate_parallelogram, panel_rule, ring_integral, sup_search, NumericsError,
    QuadratureConfig, QuadratureError, Rect, SupSearchConfig,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NevanlinnaError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("curve has no period lattice")]
    NotPeriodic,
    #[error("characteristic needs r_max > 1 and at least 2 samples (got r_max={r_max}, samples={samples})")]
    InvalidProfileRequest { r_max: f64, samples: usize },
    #[error("limit estimate needs at least 4 profile rows, got {0}")]
    TooFewRows(usize),
    #[error("rescaling factor must be positive and finite, got {0}")]
    InvalidScale(f64),
}

/// A holomorphic curve seen through its energy density.
pub trait Curve: Sync {
    /// `|df|^2` at `z`; never negative.
    fn energy_density(&self, z: Complex64) -> f64;

    /// Period lattice when the curve is doubly periodic.
    fn period_lattice(&self) -> Option<Lattice> {
        None
    }

    /// `|df|` at `z`.
    fn spherical_derivative(&self, z: Complex64) -> f64 {
        self.energy_density(z).sqrt()
    }
}

impl<C: Curve + ?Sized> Curve for &C {
    fn energy_density(&self, z: Complex64) -> f64 {
        (**self).energy_density(z)
    }

    fn period_lattice(&self) -> Option<Lattice> {
        (**self).period_lattice()
    }
}

impl Curve for ExtremalBrodyCurve {
    fn energy_density(&self, z: Complex64) -> f64 {
        self.spherical_derivative_sq(z)
    }

    fn period_lattice(&self) -> Option<Lattice> {
        Some(*self.lattice())
    }
}

/// A constant map; periodic with respect to any lattice.
#[derive(Debug, Clone, Copy)]
pub struct ConstantCurve {
    lattice: Lattice,
}

impl ConstantCurve {
    pub fn new(lattice: Lattice) -> Self {
        Self { lattice }
    }
}

impl Default for ConstantCurve {
    fn default() -> Self {
        Self::new(Lattice::unit_square())
    }
}

impl Curve for ConstantCurve {
    fn energy_density(&self, _z: Complex64) -> f64 {
        0.0
    }

    fn period_lattice(&self) -> Option<Lattice> {
        Some(self.lattice)
    }
}

/// `g(z) = f(c z)`: `|dg|^2(z) = c^2 |df|^2(c z)`, periods divided by `c`.
#[derive(Debug, Clone, Copy)]
pub struct Rescaled<C> {
    inner: C,
    factor: f64,
}

impl<C: Curve> Rescaled<C> {
    pub fn new(inner: C, factor: f64) -> Result<Self, NevanlinnaError> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(NevanlinnaError::InvalidScale(factor));
        }
        Ok(Self { inner, factor })
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }
}

impl<C: Curve> Curve for Rescaled<C> {
    fn energy_density(&self, z: Complex64) -> f64 {
        self.factor * self.factor * self.inner.energy_density(z * self.factor)
    }

    fn period_lattice(&self) -> Option<Lattice> {
        self.inner
            .period_lattice()
            .and_then(|l| l.scaled(1.0 / self.factor).ok())
    }
}

/// Integration region for [`energy_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disk { radius: f64 },
    Parallelogram(Lattice),
}

/// `∬_region |df|^2 dx dy`.
pub fn energy_integral<C: Curve + ?Sized>(
    curve: &C,
    region: &Region,
    cfg: &QuadratureConfig,
) -> Result<f64, NevanlinnaError> {
    let density = |z: Complex64| curve.energy_density(z);
    let v = match region {
        Region::Disk { radius } => integrate_disk(density, *radius, cfg)?,
        Region::Parallelogram(lattice) => integrate_parallelogram(density, lattice, cfg)?,
    };
    Ok(v)
}

/// Mean energy of a periodic curve: energy per fundamental domain divided by
/// the domain's area.
pub fn mean_energy_periodic<C: Curve + ?Sized>(
    curve: &C,
    cfg: &QuadratureConfig,
) -> Result<f64, NevanlinnaError> {
    let lattice = curve.period_lattice().ok_or(NevanlinnaError::NotPeriodic)?;
    let energy = energy_integral(curve, &Region::Parallelogram(lattice), cfg)?;
    Ok(energy / lattice.area())
}

/// One row of a characteristic profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub r: f64,
    /// `T(r, f)`
    pub t: f64,
    /// `2 T(r, f) / (π r^2)`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicProfile {
    pub rows: Vec<ProfileRow>,
}

impl CharacteristicProfile {
    pub fn last(&self) -> Option<&ProfileRow> {
        self.rows.last()
    }

    /// Largest `T - π r^2 / 2` over the rows (non-positive for Brody curves).
    pub fn max_brody_excess(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| row.t - std::f64::consts::PI * row.r * row.r / 2.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].r > w[0].r && w[1].t >= w[0].t)
    }
}

/// Widest radial panel used by [`characteristic`].
const RADIAL_PANEL: f64 = 0.5;

/// Deepest bisection of a radial panel before giving up.
const MAX_PANEL_DEPTH: u32 = 12;

/// Angular profile `a(ρ) = ρ ∫ |df|^2(ρ e^{iθ}) dθ` at the 21 Kronrod
/// nodes of `[a, b]`, bisected until the Gauss and Kronrod sums agree.
fn radial_panels<C: Curve + ?Sized>(
    curve: &C,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
    depth: u32,
) -> Result<Vec<(f64, f64)>, NevanlinnaError> {
    let rule = panel_rule(a, b);
    let mut samples = Vec::with_capacity(21);
    let (mut kronrod, mut gauss) = (0.0, 0.0);
    for k in 0..21 {
        let rho = rule.nodes[k];
        let inner = QuadratureConfig {
            abs_tol: 0.1 * cfg.abs_tol / (2.0 * std::f64::consts::PI * rho).max(1.0),
            rel_tol: 0.1 * cfg.rel_tol,
            ..*cfg
        };
        let value = ring_integral(|z| curve.energy_density(z), rho, &inner)?;
        kronrod += rule.kronrod[k] * value;
        gauss += rule.gauss[k] * value;
        samples.push((rho, rule.kronrod[k] * value));
    }
    let error = (kronrod - gauss).abs();
    if error <= cfg.abs_tol * (b - a) + cfg.rel_tol * kronrod.abs() {
        return Ok(samples);
    }
    if depth >= MAX_PANEL_DEPTH {
        return Err(QuadratureError::NotConverged {
            value: kronrod,
            error,
            subdivisions: 1 << depth,
        }
        .into());
    }
    let mid = 0.5 * (a + b);
    let mut left = radial_panels(curve, a, mid, cfg, depth + 1)?;
    left.extend(radial_panels(curve, mid, b, cfg, depth + 1)?);
    Ok(left)
}

/// Sampled `T(r, f)` at `samples` geometrically spaced radii in `[1, r_max]`.
///
/// Exchanging the order of integration gives
/// `T(r) = ∬_{|z|<r} log(r / max(1, |z|)) |df|^2`, so every sampled radius
/// is a weighted sum over one shared set of angular profiles. Radial panels
/// break at 1 and at each sampled radius, where the weight has kinks, and
/// are evaluated in parallel but summed in a fixed order.
pub fn characteristic<C: Curve + ?Sized>(
    curve: &C,
    r_max: f64,
    samples: usize,
    cfg: &QuadratureConfig,
) -> Result<CharacteristicProfile, NevanlinnaError> {
    if !(r_max > 1.0 && r_max.is_finite()) || samples < 2 {
        return Err(NevanlinnaError::InvalidProfileRequest { r_max, samples });
    }
    cfg.validate()?;
    let step = r_max.ln() / (samples - 1) as f64;
    let radii: Vec<f64> = (0..samples)
        .map(|i| {
            if i == samples - 1 {
                r_max
            } else {
                (step * i as f64).exp()
            }
        })
        .collect();

    let mut breaks = vec![0.0];
    breaks.extend(&radii);
    let mut panels = Vec::new();
    for w in breaks.windows(2) {
        let pieces = ((w[1] - w[0]) / RADIAL_PANEL).ceil().max(1.0) as usize;
        let width = (w[1] - w[0]) / pieces as f64;
        for k in 0..pieces {
            let hi = if k + 1 == pieces {
                w[1]
            } else {
                w[0] + width * (k + 1) as f64
            };
            panels.push((w[0] + width * k as f64, hi));
        }
    }
    let profiles: Vec<Vec<(f64, f64)>> = panels
        .par_iter()
        .map(|&(a, b)| radial_panels(curve, a, b, cfg, 0))
        .collect::<Result<_, _>>()?;

    let rows = radii
        .iter()
        .map(|&r| {
            let mut t = 0.0;
            for (&(_, b), nodes) in panels.iter().zip(&profiles) {
                if b > r {
                    break;
                }
                for &(rho, weighted) in nodes {
                    t += weighted * (r / rho.max(1.0)).ln();
                }
            }
            ProfileRow {
                r,
                t,
                ratio: 2.0 * t / (std::f64::consts::PI * r * r),
            }
        })
        .collect();
    Ok(CharacteristicProfile { rows })
}

/// Finite-radius surrogate for `limsup 2T/(πr^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    /// Ratio at the largest sampled radius.
    pub estimate: f64,
    /// Spread (max - min) of the ratios over the top quartile of radii.
    pub uncertainty: f64,
}

pub fn mean_energy_limit_estimate(
    profile: &CharacteristicProfile,
) -> Result<LimitEstimate, NevanlinnaError> {
    let n = profile.rows.len();
    if n < 4 {
        return Err(NevanlinnaError::TooFewRows(n));
    }
    let top = n.div_ceil(4).max(2);
    let tail = &profile.rows[n - top..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.ratio), hi.max(r.ratio))
        });
    Ok(LimitEstimate {
        estimate: profile.rows[n - 1].ratio,
        uncertainty: hi - lo,
    })
}

/// Allowed excess of `sup |df|` over 1 in [`brody_check`].
pub const BRODY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrodyCheck {
    pub ok: bool,
    pub sup_found: f64,
    pub argmax: Complex64,
}

/// Searches `domain` for the largest `|df|` and compares it with 1.
pub fn brody_check<C: Curve + ?Sized>(
    curve: &C,
    domain: &Rect,
    cfg: &SupSearchConfig,
) -> Result<BrodyCheck, NevanlinnaError> {
    let found = sup_search(|z| curve.spherical_derivative(z), domain, cfg)?;
    Ok(BrodyCheck {
        ok: found.value <= 1.0 + BRODY_SLACK,
        sup_found: found.value,
        argmax: found.argmax,
    })
}

/// Bounding box of the fundamental parallelogram of `lattice`.
pub fn fundamental_box(lattice: &Lattice) -> Rect {
    let (a, b) = lattice.generators();
    let corners = [Complex64::new(0.0, 0.0), a, b, a + b];
    let re = corners.iter().map(|c| c.re);
    let im = corners.iter().map(|c| c.im);
    Rect {
        re_min: re.clone().fold(f64::INFINITY, f64::min),
        re_max: re.fold(f64::NEG_INFINITY, f64::max),
        im_min: im.clone().fold(f64::INFINITY, f64::min),
        im_max: im.fold(f64::NEG_INFINITY, f64::max),
    }
}
