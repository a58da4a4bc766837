//! Independent oracles for values the library computes by other means.

use num_complex::Complex64;

use meandim_core::elliptic::{cubic_elliptic_integral, ExtremalBrodyCurve};
use meandim_core::numerics::QuadratureConfig;

/// `∫_1^∞ dx / sqrt(x^3 - 1)` to 30 digits, from an arbitrary-precision
/// quadrature.
const ELLIPTIC_INTEGRAL: f64 = 2.428_650_647_887_581_589_555;

/// Composite Simpson rule after `x = 1 + t^2`, `t = s / (1 - s)`, which
/// turns the integrand into a bounded smooth function on `[0, 1]`.
fn elliptic_integral_composite(panels: usize) -> f64 {
    let g = |s: f64| {
        if s >= 1.0 {
            return 2.0;
        }
        let t = s / (1.0 - s);
        let x = 1.0 + t * t;
        2.0 / (x * x + x + 1.0).sqrt() / ((1.0 - s) * (1.0 - s))
    };
    let h = 1.0 / panels as f64;
    let mut sum = g(0.0) + g(1.0);
    for k in 1..panels {
        sum += g(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

#[test]
fn elliptic_integral_matches_composite_rule_and_frozen_value() {
    let cfg = QuadratureConfig::new(1e-13, 1e-13, 2000).unwrap();
    let adaptive = cubic_elliptic_integral(&cfg).unwrap();
    let composite = elliptic_integral_composite(1_000_000);
    assert!((composite - ELLIPTIC_INTEGRAL).abs() < 1e-10, "{composite}");
    assert!((adaptive - ELLIPTIC_INTEGRAL).abs() < 1e-12, "{adaptive}");
}

/// `1/z^2 + Σ' (1/(z-w)^2 - 1/w^2)` over `w = m a + n b`, `|m|, |n| <= M`.
fn wp_lattice_sum(z: Complex64, a: Complex64, b: Complex64, m_max: i64) -> Complex64 {
    let mut sum = 1.0 / (z * z);
    for m in -m_max..=m_max {
        for n in -m_max..=m_max {
            if m == 0 && n == 0 {
                continue;
            }
            let w = a * m as f64 + b * n as f64;
            sum += 1.0 / ((z - w) * (z - w)) - 1.0 / (w * w);
        }
    }
    sum
}

#[test]
fn weierstrass_matches_lattice_sum() {
    let curve =
        ExtremalBrodyCurve::build(&QuadratureConfig::new(1e-12, 1e-12, 2000).unwrap()).unwrap();
    let wp = curve.weierstrass();
    let (a, b) = wp.lattice().generators();
    for z in [
        Complex64::new(0.3, 0.1),
        Complex64::new(0.5, 0.4),
        a * 0.5 + b * 0.25,
        Complex64::new(-0.2, 0.7),
    ] {
        let (p, _) = wp.eval(z).unwrap();
        let oracle = wp_lattice_sum(z, a, b, 600);
        assert!(
            (p - oracle).norm() < 1e-5 * p.norm().max(1.0),
            "z={z}: {p} vs {oracle}"
        );
    }
}

#[test]
fn extremal_curve_frozen_values() {
    let curve = ExtremalBrodyCurve::from_elliptic_integral(ELLIPTIC_INTEGRAL).unwrap();
    let k = std::f64::consts::PI * 8f64.sqrt();
    let omega1 = 2f64.powf(0.25) / k.sqrt() * ELLIPTIC_INTEGRAL;
    assert!((curve.omega1() - omega1).abs() < 1e-15);
    let area = 2.0 * 3f64.sqrt() * omega1 * omega1;
    assert!((curve.lattice().area() - area).abs() < 1e-13);
    assert!((2.0 / area - 0.615_019_867_819_8).abs() < 1e-12);
}
