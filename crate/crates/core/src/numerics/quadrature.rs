//! Adaptive one-dimensional quadrature.
//!
//! Globally adaptive bisection driven by the 21-point Gauss-Kronrod pair, in
//! the spirit of QUADPACK's QAG. Improper integrals are mapped onto finite
//! panels by a fixed change of variables before the adaptive loop runs.

use serde::{Deserialize, Serialize};

use super::QuadratureError;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_846_811_880,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod abscissae XGK[1], XGK[3], ...
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// How endpoint singularities and infinite ranges are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SingularitySubstitution {
    /// Integrate in the original variable. An infinite upper limit is mapped
    /// with `x = c + (1 - u) / u`.
    #[default]
    None,
    /// Remove `sqrt(x - a)`-type endpoint behaviour with `x = a + t^2` (and the
    /// mirrored map at a finite upper limit). An infinite tail is mapped with
    /// `x = c / u^2`, which turns `x^{-3/2}` decay into a bounded integrand.
    AlgebraicEndpoint,
}

/// Tolerances and limits for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    #[serde(default)]
    pub singularity_substitution: SingularitySubstitution,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
            singularity_substitution: SingularitySubstitution::None,
        }
    }
}

impl QuadratureConfig {
    pub fn new(
        abs_tol: f64,
        rel_tol: f64,
        max_subdivisions: usize,
    ) -> Result<Self, QuadratureError> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
            singularity_substitution: SingularitySubstitution::None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_substitution(mut self, sub: SingularitySubstitution) -> Self {
        self.singularity_substitution = sub;
        self
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(QuadratureError::InvalidConfig(format!(
                "tolerances must be positive (abs_tol={}, rel_tol={})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(QuadratureError::InvalidConfig(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Copy with the absolute tolerance scaled, used for nested integrals.
    pub(crate) fn scaled_abs(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Result of one Gauss-Kronrod panel.
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let error = rescale_error((res_k - res_g) * half, res_abs, res_asc);
    Panel { a, b, value, error }
}

/// Nodes and weights of the 21-point Kronrod rule on `[a, b]`, with the
/// embedded 10-point Gauss weights (zero at Kronrod-only nodes).
pub(crate) struct PanelRule {
    pub nodes: [f64; 21],
    pub kronrod: [f64; 21],
    pub gauss: [f64; 21],
}

pub(crate) fn panel_rule(a: f64, b: f64) -> PanelRule {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut rule = PanelRule {
        nodes: [center; 21],
        kronrod: [WGK[10] * half; 21],
        gauss: [0.0; 21],
    };
    for j in 0..10 {
        let dx = half * XGK[j];
        rule.nodes[2 * j] = center - dx;
        rule.nodes[2 * j + 1] = center + dx;
        rule.kronrod[2 * j] = WGK[j] * half;
        rule.kronrod[2 * j + 1] = WGK[j] * half;
        if j % 2 == 1 {
            rule.gauss[2 * j] = WG[j / 2] * half;
            rule.gauss[2 * j + 1] = WG[j / 2] * half;
        }
    }
    rule.nodes[20] = center;
    rule
}

/// Sum in a fixed order (by left endpoint) so results do not depend on the
/// order in which panels were refined.
fn ordered_totals(panels: &mut [Panel]) -> (f64, f64) {
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    panels
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    adaptive_from(f, a, b, 1, cfg)
}

/// As [`adaptive`], but starting from `pieces` equal panels. Integrands with
/// many oscillations on `[a, b]` need this to avoid a falsely small first
/// estimate.
pub(crate) fn adaptive_from<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    pieces: usize,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    if a == b {
        return Ok(0.0);
    }
    let pieces = pieces.max(1);
    let width = (b - a) / pieces as f64;
    let mut panels: Vec<Panel> = (0..pieces)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == pieces {
                b
            } else {
                a + width * (i + 1) as f64
            };
            gauss_kronrod(f, lo, hi)
        })
        .collect();
    let mut value: f64 = panels.iter().map(|p| p.value).sum();
    let mut error: f64 = panels.iter().map(|p| p.error).sum();
    let mut subdivisions = pieces;

    while error > cfg.target(value) {
        if subdivisions >= cfg.max_subdivisions.max(pieces) {
            let (value, error) = ordered_totals(&mut panels);
            return Err(QuadratureError::NotConverged {
                value,
                error,
                subdivisions,
            });
        }
        // Bisect the panel with the largest error; ties go to the leftmost.
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error).then(q.a.total_cmp(&p.a)))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a.min(p.b) && mid < p.a.max(p.b)) {
            // Panel has collapsed to adjacent floats; nothing left to refine.
            panels.push(p);
            let (value, error) = ordered_totals(&mut panels);
            return Err(QuadratureError::NotConverged {
                value,
                error,
                subdivisions,
            });
        }
        let left = gauss_kronrod(f, p.a, mid);
        let right = gauss_kronrod(f, mid, p.b);
        panels.push(left);
        panels.push(right);
        subdivisions += 1;

        value = panels.iter().map(|p| p.value).sum();
        error = panels.iter().map(|p| p.error).sum();
    }

    Ok(ordered_totals(&mut panels).0)
}

/// Integrate `f` over `[a, b]`, where `b` may be `f64::INFINITY`.
///
/// The returned value meets `error <= max(abs_tol, rel_tol * |value|)` by the
/// Kronrod error estimate, or a [`QuadratureError::NotConverged`] carrying
/// the partial value is returned.
pub fn integrate_1d<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if a.is_nan() || b.is_nan() || a.is_infinite() {
        return Err(QuadratureError::InvalidInterval { a, b });
    }
    if b < a {
        return integrate_1d(f, b, a, cfg).map(|v| -v);
    }

    match (cfg.singularity_substitution, b.is_infinite()) {
        (SingularitySubstitution::None, false) => adaptive(&f, a, b, cfg),
        (SingularitySubstitution::None, true) => {
            // x = a + (1 - u) / u, dx = du / u^2, u in (0, 1]
            let g = |u: f64| {
                let x = a + (1.0 - u) / u;
                f(x) / (u * u)
            };
            adaptive(&g, 0.0, 1.0, cfg)
        }
        (SingularitySubstitution::AlgebraicEndpoint, false) => {
            let mid = 0.5 * (a + b);
            let span = (mid - a).sqrt();
            let half_cfg = cfg.scaled_abs(0.5);
            // x = a + t^2 on [a, mid]; x = b - t^2 on [mid, b]
            let lower = adaptive(&|t: f64| 2.0 * t * f(a + t * t), 0.0, span, &half_cfg)?;
            let upper = adaptive(&|t: f64| 2.0 * t * f(b - t * t), 0.0, span, &half_cfg)?;
            Ok(lower + upper)
        }
        (SingularitySubstitution::AlgebraicEndpoint, true) => {
            // Split at c = a + 1: x = a + t^2 near the endpoint, x = c / u^2 on
            // the tail (c > 0 is required, so shift when a + 1 <= 0).
            let c = if a + 1.0 > 0.0 { a + 1.0 } else { 1.0 };
            let half_cfg = cfg.scaled_abs(0.5);
            let head = if c > a {
                adaptive(
                    &|t: f64| 2.0 * t * f(a + t * t),
                    0.0,
                    (c - a).sqrt(),
                    &half_cfg,
                )?
            } else {
                0.0
            };
            let tail = adaptive(
                &|u: f64| {
                    let x = c / (u * u);
                    f(x) * 2.0 * c / (u * u * u)
                },
                0.0,
                1.0,
                &half_cfg,
            )?;
            Ok(head + tail)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::new(1e-13, 1e-13, 500).unwrap()
    }

    #[test]
    fn linear_on_unit_interval() {
        let v = integrate_1d(|x| x, 0.0, 1.0, &cfg()).unwrap();
        assert_relative_eq!(v, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn constant_angular_average() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let v = integrate_1d(|_| 1.0 / two_pi, 0.0, two_pi, &cfg()).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate_1d(|x| x * x, 2.0, 0.0, &cfg()).unwrap();
        assert_relative_eq!(v, -8.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn log_weighted_power() {
        // int_0^1 x^a ln(1/x) dx = 1 / (a + 1)^2
        for &alpha in &[2.6, 0.5, -0.5] {
            let f = |x: f64| x.powf(alpha) * (1.0 / x).ln();
            let v = integrate_1d(
                f,
                0.0,
                1.0,
                &QuadratureConfig::new(1e-12, 1e-10, 2000).unwrap(),
            )
            .unwrap();
            assert_relative_eq!(
                v,
                1.0 / ((alpha + 1.0) * (alpha + 1.0)),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn semi_infinite_plain_map() {
        // int_0^inf e^{-x} dx = 1
        let v = integrate_1d(|x: f64| (-x).exp(), 0.0, f64::INFINITY, &cfg()).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn algebraic_endpoint_on_finite_range() {
        // int_0^1 dx / sqrt(x (1 - x)) = pi
        let c = cfg().with_substitution(SingularitySubstitution::AlgebraicEndpoint);
        let v = integrate_1d(|x: f64| 1.0 / (x * (1.0 - x)).sqrt(), 0.0, 1.0, &c).unwrap();
        assert_relative_eq!(v, std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn non_convergence_reports_partial_value() {
        let c = QuadratureConfig::new(1e-30, 1e-30, 5).unwrap();
        match integrate_1d(|x: f64| x.sin(), 0.0, 10.0, &c) {
            Err(QuadratureError::NotConverged {
                value,
                subdivisions,
                ..
            }) => {
                assert_eq!(subdivisions, 5);
                assert_relative_eq!(value, 1.0 - 10f64.cos(), epsilon = 1e-6);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(QuadratureConfig::new(0.0, 1e-8, 10).is_err());
        assert!(QuadratureConfig::new(1e-8, 1e-8, 0).is_err());
    }
}
