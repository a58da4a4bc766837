//! Deterministic global maximisation over a rectangle.
//!
//! A uniform grid pass picks candidate starts, a seeded stratified sample
//! adds a few more, and each start is polished by compass search with a
//! geometrically shrinking step.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Axis-aligned closed rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, NumericsError> {
        let r = Self {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        r.validate()?;
        Ok(r)
    }

    /// Square `[-half, half]^2`.
    pub fn centered_square(half: f64) -> Result<Self, NumericsError> {
        Self::new(-half, half, -half, half)
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.re_max > self.re_min) || !(self.im_max > self.im_min) {
            return Err(NumericsError::DegenerateRect(*self));
        }
        Ok(())
    }

    fn clamp(&self, z: Complex64) -> Complex64 {
        Complex64::new(
            z.re.clamp(self.re_min, self.re_max),
            z.im.clamp(self.im_min, self.im_max),
        )
    }

    /// The point at relative position `(u, v)` in `[0, 1]^2`.
    pub fn point(&self, u: f64, v: f64) -> Complex64 {
        Complex64::new(
            self.re_min + u * (self.re_max - self.re_min),
            self.im_min + v * (self.im_max - self.im_min),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupSearchConfig {
    /// Grid points per axis in the initial pass.
    pub initial_grid: usize,
    pub refinement_levels: usize,
    pub shrink_factor: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SupSearchConfig {
    fn default() -> Self {
        Self {
            initial_grid: 64,
            refinement_levels: 40,
            shrink_factor: 0.5,
            restarts: 8,
            seed: 0x5eed,
        }
    }
}

impl SupSearchConfig {
    pub fn validate(&self) -> Result<(), NumericsError> {
        if self.initial_grid < 8 {
            return Err(NumericsError::InvalidConfig(
                "initial_grid must be >= 8".into(),
            ));
        }
        if self.refinement_levels < 1 {
            return Err(NumericsError::InvalidConfig(
                "refinement_levels must be >= 1".into(),
            ));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(NumericsError::InvalidConfig(
                "shrink_factor must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Best value found, where it was found, and the final step length of the
/// refinement that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    pub value: f64,
    pub argmax: Complex64,
    pub spacing: f64,
}

const MAX_MOVES_PER_LEVEL: usize = 256;

fn better(a: f64, b: f64) -> bool {
    // NaN never wins
    a > b || (b.is_nan() && !a.is_nan())
}

/// Maximise `g` over the closed rectangle.
///
/// The reported value is always an actual sample `g(argmax)`, so it is a
/// lower bound on the true supremum.
pub fn sup_search<G>(g: G, domain: &Rect, cfg: &SupSearchConfig) -> Result<SupResult, NumericsError>
where
    G: Fn(Complex64) -> f64,
{
    domain.validate()?;
    cfg.validate()?;

    let n = cfg.initial_grid;
    let step_u = 1.0 / (n - 1) as f64;
    let mut samples: Vec<(f64, Complex64)> = Vec::with_capacity(n * n + cfg.restarts);
    for j in 0..n {
        for i in 0..n {
            let z = domain.point(i as f64 * step_u, j as f64 * step_u);
            samples.push((g(z), z));
        }
    }

    // Stratified jitter: one seeded point per stratum of a k x k partition.
    let k = (cfg.restarts as f64).sqrt().ceil().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for j in 0..k {
        for i in 0..k {
            let u = (i as f64 + rng.random::<f64>()) / k as f64;
            let v = (j as f64 + rng.random::<f64>()) / k as f64;
            let z = domain.point(u, v);
            samples.push((g(z), z));
        }
    }

    // Stable sort keeps index order among equal values.
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&p, &q| samples[q].0.total_cmp(&samples[p].0));

    let h0 = ((domain.re_max - domain.re_min).max(domain.im_max - domain.im_min)) * step_u;
    let mut best = SupResult {
        value: samples[order[0]].0,
        argmax: samples[order[0]].1,
        spacing: h0,
    };

    for &idx in order.iter().take(cfg.restarts.max(1)) {
        let (mut value, mut z) = samples[idx];
        let mut h = h0;
        for _ in 0..cfg.refinement_levels {
            for _ in 0..MAX_MOVES_PER_LEVEL {
                let mut moved = false;
                for (dx, dy) in [
                    (1, 0),
                    (-1, 0),
                    (0, 1),
                    (0, -1),
                    (1, 1),
                    (1, -1),
                    (-1, 1),
                    (-1, -1),
                ] {
                    let cand = domain.clamp(z + Complex64::new(dx as f64 * h, dy as f64 * h));
                    let v = g(cand);
                    if better(v, value) {
                        value = v;
                        z = cand;
                        moved = true;
                    }
                }
                if !moved {
                    break;
                }
            }
            h *= cfg.shrink_factor;
        }
        if better(value, best.value) {
            best = SupResult {
                value,
                argmax: z,
                spacing: h,
            };
        }
    }
    Ok(best)
}
