//! Property tests for the quadrature kernels.

use num_complex::Complex64;
use proptest::prelude::*;

use meandim_core::numerics::{integrate_1d, integrate_disk, QuadratureConfig};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::new(1e-12, 1e-12, 2000).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integrate_1d_is_linear(
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
        a in -2.0f64..0.0,
        width in 0.1f64..4.0,
        freq in 0.1f64..5.0,
    ) {
        let b = a + width;
        let f = |x: f64| (freq * x).sin();
        let g = |x: f64| (-(x * x)).exp();
        let combined = integrate_1d(|x| alpha * f(x) + beta * g(x), a, b, &cfg()).unwrap();
        let separate = alpha * integrate_1d(f, a, b, &cfg()).unwrap() + beta * integrate_1d(g, a, b, &cfg()).unwrap();
        prop_assert!((combined - separate).abs() <= 1e-10 * (1.0 + separate.abs()));
    }

    #[test]
    fn disk_integral_of_positive_function_grows_with_radius(
        r in 0.1f64..3.0,
        dr in 0.05f64..1.0,
        cx in -1.0f64..1.0,
        cy in -1.0f64..1.0,
    ) {
        let c = Complex64::new(cx, cy);
        let g = move |z: Complex64| 1.0 / (1.0 + (z - c).norm_sqr());
        let inner = integrate_disk(g, r, &cfg()).unwrap();
        let outer = integrate_disk(g, r + dr, &cfg()).unwrap();
        prop_assert!(inner > 0.0);
        prop_assert!(outer > inner);
    }

    #[test]
    fn disk_integral_of_constant_is_area(r in 0.1f64..5.0, c in 0.1f64..3.0) {
        let value = integrate_disk(|_| c, r, &cfg()).unwrap();
        prop_assert!((value - c * std::f64::consts::PI * r * r).abs() <= 1e-10 * value);
    }
}
