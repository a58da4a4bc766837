//! Finite-difference stencils on the plane.

use num_complex::Complex64;

/// Five-point approximation of the Laplacian of `f` at `z` with spacing `h`.
pub fn laplacian_5pt<F>(f: F, z: Complex64, h: f64) -> f64
where
    F: Fn(Complex64) -> f64,
{
    let east = f(z + Complex64::new(h, 0.0));
    let west = f(z - Complex64::new(h, 0.0));
    let north = f(z + Complex64::new(0.0, h));
    let south = f(z - Complex64::new(0.0, h));
    (east + west + north + south - 4.0 * f(z)) / (h * h)
}
