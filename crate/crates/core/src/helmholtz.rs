//! The radial Helmholtz barrier
//! `w_λ(z) = (1/2π) ∫_0^{2π} exp(√λ (x cos θ + y sin θ)) dθ`,
//! a positive solution of `(-Δ + λ) w = 0` with minimum 1 at the origin,
//! and a finite-difference solver for `(-Δ + c) u = g` on a square used to
//! exercise the discrete maximum principle.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{laplacian_5pt, QuadratureConfig};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HelmholtzError {
    #[error("lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("invalid grid problem: {0}")]
    InvalidGrid(String),
    #[error("stencil spacing must be positive, got {0}")]
    InvalidSpacing(f64),
    #[error("solver stopped after {iterations} iterations with residual {residual:e} (target {target:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        target: f64,
    },
    #[error("grid function does not match the problem grid")]
    ShapeMismatch,
    #[error("csv output failed: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelmholtzSolution {
    lambda: f64,
}

impl HelmholtzSolution {
    pub fn new(lambda: f64) -> Result<Self, HelmholtzError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(HelmholtzError::InvalidLambda(lambda));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Trapezoid nodes that resolve `exp(a cos θ)` to rounding level.
fn base_nodes(a: f64) -> usize {
    32 + 2 * a.ceil() as usize
}

const MAX_TRAPEZOID_NODES: usize = 1 << 16;

/// Periodic trapezoid rule with `nodes` equally spaced angles.
fn trapezoid(lambda: f64, z: Complex64, nodes: usize) -> f64 {
    let k = lambda.sqrt();
    let step = 2.0 * PI / nodes as f64;
    let sum: f64 = (0..nodes)
        .map(|j| {
            let (s, c) = (step * j as f64).sin_cos();
            (k * (z.re * c + z.im * s)).exp()
        })
        .sum();
    sum / nodes as f64
}

/// `w_λ(z)`. The node count doubles until two successive trapezoid sums
/// agree to the configured tolerance (the rule converges geometrically on
/// this analytic periodic integrand).
pub fn w_eval(sol: &HelmholtzSolution, z: Complex64, cfg: &QuadratureConfig) -> f64 {
    let mut nodes = base_nodes(sol.lambda.sqrt() * z.norm());
    let mut prev = trapezoid(sol.lambda, z, nodes);
    while nodes < MAX_TRAPEZOID_NODES {
        nodes *= 2;
        let next = trapezoid(sol.lambda, z, nodes);
        let converged = (next - prev).abs() <= cfg.abs_tol.max(cfg.rel_tol * next.abs());
        prev = next;
        if converged {
            break;
        }
    }
    prev
}

/// Five-point value of `(-Δ + λ) w_λ` at `z`; every stencil point uses the
/// same trapezoid rule, so the result isolates the stencil error.
pub fn helmholtz_residual(
    sol: &HelmholtzSolution,
    z: Complex64,
    h: f64,
) -> Result<f64, HelmholtzError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(HelmholtzError::InvalidSpacing(h));
    }
    let nodes = 2 * base_nodes(sol.lambda.sqrt() * (z.norm() + h));
    let w = |p: Complex64| trapezoid(sol.lambda, p, nodes);
    Ok(stencil_residual(w, sol.lambda, z, h))
}

/// Five-point value of `(-Δ + λ) f` at `z` for an arbitrary function.
pub fn stencil_residual<F: Fn(Complex64) -> f64>(f: F, lambda: f64, z: Complex64, h: f64) -> f64 {
    -laplacian_5pt(&f, z, h) + lambda * f(z)
}

/// Values on the node grid `x, y = -R + i h`, `i = 0..=m-1`, stored row by
/// row (`y` outer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub half_width: f64,
    pub spacing: f64,
    pub points_per_axis: usize,
    pub values: Vec<f64>,
}

impl GridFunction {
    fn tabulate<F: Fn(f64, f64) -> f64>(half_width: f64, spacing: f64, m: usize, f: F) -> Self {
        let coord = |i: usize| -half_width + spacing * i as f64;
        let values = (0..m)
            .flat_map(|j| (0..m).map(move |i| (i, j)))
            .map(|(i, j)| f(coord(i), coord(j)))
            .collect();
        Self {
            half_width,
            spacing,
            points_per_axis: m,
            values,
        }
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + self.spacing * i as f64
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.points_per_axis + i]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.values[j * self.points_per_axis + i]
    }

    fn is_boundary(&self, i: usize, j: usize) -> bool {
        let last = self.points_per_axis - 1;
        i == 0 || j == 0 || i == last || j == last
    }

    /// `x,y,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HelmholtzError> {
        let err = |e: csv::Error| HelmholtzError::Csv(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "value"]).map_err(err)?;
        let m = self.points_per_axis;
        for j in 0..m {
            for i in 0..m {
                w.write_record([
                    format!("{:.16e}", self.coordinate(i)),
                    format!("{:.16e}", self.coordinate(j)),
                    format!("{:.16e}", self.at(i, j)),
                ])
                .map_err(err)?;
            }
        }
        w.flush().map_err(|e| HelmholtzError::Csv(e.to_string()))
    }
}

/// `(-Δ + c) u = g` on `[-R, R]^2` with Dirichlet data, discretized by the
/// five-point stencil with spacing `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridProblem {
    pub half_width: f64,
    pub spacing: f64,
    pub c: f64,
    pub rhs: GridFunction,
    /// Only the outermost ring of values is used.
    pub boundary: GridFunction,
}

/// Target for the infinity norm of the discrete residual.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

/// Slack in [`max_principle_check`].
pub const MAX_PRINCIPLE_SLACK: f64 = 1e-8;

impl GridProblem {
    pub fn new<G, B>(
        half_width: f64,
        spacing: f64,
        c: f64,
        rhs: G,
        boundary: B,
    ) -> Result<Self, HelmholtzError>
    where
        G: Fn(f64, f64) -> f64,
        B: Fn(f64, f64) -> f64,
    {
        let m = Self::grid_points(half_width, spacing)?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(HelmholtzError::InvalidGrid(format!(
                "coefficient c must be positive, got {c}"
            )));
        }
        Ok(Self {
            half_width,
            spacing,
            c,
            rhs: GridFunction::tabulate(half_width, spacing, m, rhs),
            boundary: GridFunction::tabulate(half_width, spacing, m, boundary),
        })
    }

    fn grid_points(half_width: f64, spacing: f64) -> Result<usize, HelmholtzError> {
        if !(spacing > 0.0 && spacing.is_finite() && half_width > 0.0 && half_width.is_finite()) {
            return Err(HelmholtzError::InvalidGrid(format!(
                "need R > 0 and h > 0, got R={half_width}, h={spacing}"
            )));
        }
        let cells = half_width / spacing;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * cells.max(1.0) || rounded < 1.0 {
            return Err(HelmholtzError::InvalidGrid(format!(
                "R/h = {cells} is not a positive integer"
            )));
        }
        Ok(2 * rounded as usize + 1)
    }

    pub fn validate(&self) -> Result<(), HelmholtzError> {
        let m = Self::grid_points(self.half_width, self.spacing)?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(HelmholtzError::InvalidGrid(format!(
                "coefficient c must be positive, got {}",
                self.c
            )));
        }
        for f in [&self.rhs, &self.boundary] {
            if f.points_per_axis != m || f.values.len() != m * m {
                return Err(HelmholtzError::ShapeMismatch);
            }
        }
        Ok(())
    }

    fn points(&self) -> usize {
        self.rhs.points_per_axis
    }

    /// `((-Δ_h + c) u - g)` at an interior node.
    fn residual_at(&self, u: &GridFunction, i: usize, j: usize) -> f64 {
        let h2 = self.spacing * self.spacing;
        let lap = (u.at(i + 1, j) + u.at(i - 1, j) + u.at(i, j + 1) + u.at(i, j - 1)
            - 4.0 * u.at(i, j))
            / h2;
        -lap + self.c * u.at(i, j) - self.rhs.at(i, j)
    }

    /// Infinity norm of the discrete residual over interior nodes.
    pub fn residual_norm(&self, u: &GridFunction) -> Result<f64, HelmholtzError> {
        let m = self.points();
        if u.points_per_axis != m || u.values.len() != m * m {
            return Err(HelmholtzError::ShapeMismatch);
        }
        Ok((1..m - 1)
            .flat_map(|j| (1..m - 1).map(move |i| (i, j)))
            .map(|(i, j)| self.residual_at(u, i, j).abs())
            .fold(0.0, f64::max))
    }
}

/// Solves the discrete problem by conjugate gradients on the interior
/// unknowns (the operator is symmetric positive definite), starting from 0
/// with a fixed sweep order.
pub fn barrier_solve(p: &GridProblem) -> Result<GridFunction, HelmholtzError> {
    p.validate()?;
    let m = p.points();
    let n = m - 2;
    let h2 = p.spacing * p.spacing;
    let diag = 4.0 / h2 + p.c;
    let idx = |i: usize, j: usize| (j - 1) * n + (i - 1);

    // Right-hand side with the boundary values moved across.
    let mut b = vec![0.0; n * n];
    for j in 1..m - 1 {
        for i in 1..m - 1 {
            let mut v = p.rhs.at(i, j);
            for (ii, jj) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
                if p.boundary.is_boundary(ii, jj) {
                    v += p.boundary.at(ii, jj) / h2;
                }
            }
            b[idx(i, j)] = v;
        }
    }

    let apply = |x: &[f64], out: &mut [f64]| {
        for j in 1..m - 1 {
            for i in 1..m - 1 {
                let mut v = diag * x[idx(i, j)];
                if i > 1 {
                    v -= x[idx(i - 1, j)] / h2;
                }
                if i < m - 2 {
                    v -= x[idx(i + 1, j)] / h2;
                }
                if j > 1 {
                    v -= x[idx(i, j - 1)] / h2;
                }
                if j < m - 2 {
                    v -= x[idx(i, j + 1)] / h2;
                }
                out[idx(i, j)] = v;
            }
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let inf = |a: &[f64]| a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    let mut x = vec![0.0; n * n];
    let mut r = b.clone();
    let mut d = r.clone();
    let mut ad = vec![0.0; n * n];
    let mut rr = dot(&r, &r);
    // Stop a little below the target so rounding in the final
    // reassembly cannot push the reported residual over it.
    let stop = 0.25 * SOLVER_TOLERANCE;
    let max_iter = 20 * n * n + 100;
    let mut iterations = 0;
    while inf(&r) > stop && iterations < max_iter {
        apply(&d, &mut ad);
        let alpha = rr / dot(&d, &ad);
        for k in 0..x.len() {
            x[k] += alpha * d[k];
            r[k] -= alpha * ad[k];
        }
        iterations += 1;
        // Periodically recompute the residual to shed drift.
        if iterations % 50 == 0 {
            apply(&x, &mut ad);
            for k in 0..r.len() {
                r[k] = b[k] - ad[k];
            }
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..d.len() {
            d[k] = r[k] + beta * d[k];
        }
    }

    let mut u = p.boundary.clone();
    for j in 1..m - 1 {
        for i in 1..m - 1 {
            *u.at_mut(i, j) = x[idx(i, j)];
        }
    }
    let residual = p.residual_norm(&u)?;
    if residual > SOLVER_TOLERANCE {
        return Err(HelmholtzError::NotConverged {
            iterations,
            residual,
            target: SOLVER_TOLERANCE,
        });
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    pub ok: bool,
    /// Worst interior violation `(x, y)`, if any.
    pub witness: Option<(f64, f64)>,
    pub sup_interior: f64,
    pub bound: f64,
}

/// Compares `sup |u|` over interior nodes with
/// `sup |g| / c + max |boundary| + 1e-8`.
pub fn max_principle_check(
    p: &GridProblem,
    u: &GridFunction,
) -> Result<MaxPrincipleReport, HelmholtzError> {
    p.validate()?;
    let m = p.points();
    if u.points_per_axis != m || u.values.len() != m * m {
        return Err(HelmholtzError::ShapeMismatch);
    }
    let sup_g = p.rhs.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut sup_boundary = 0.0f64;
    for j in 0..m {
        for i in 0..m {
            if p.boundary.is_boundary(i, j) {
                sup_boundary = sup_boundary.max(p.boundary.at(i, j).abs());
            }
        }
    }
    let bound = sup_g / p.c + MAX_PRINCIPLE_SLACK + sup_boundary;
    let mut sup_interior = 0.0f64;
    let mut witness = None;
    for j in 1..m - 1 {
        for i in 1..m - 1 {
            let v = u.at(i, j).abs();
            if v > sup_interior {
                sup_interior = v;
                if v > bound {
                    witness = Some((u.coordinate(i), u.coordinate(j)));
                }
            }
        }
    }
    Ok(MaxPrincipleReport {
        ok: witness.is_none(),
        witness,
        sup_interior,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::new(1e-15, 1e-15, 2000).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `I_0(x) = Σ (x²/4)^k / (k!)²`
    fn bessel_i0_series(x: f64) -> f64 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= q / (k * k) as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn value_at_origin() {
        for lambda in [0.1, 1.0, 7.5] {
            let w = w_eval(
                &HelmholtzSolution::new(lambda).unwrap(),
                c(0.0, 0.0),
                &cfg(),
            );
            assert!((w - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn bessel_oracle() {
        let sol = HelmholtzSolution::new(1.0).unwrap();
        let oracle = bessel_i0_series(1.0);
        assert!((oracle - 1.266_065_88).abs() < 1e-8);
        for z in [c(1.0, 0.0), c(0.0, 1.0), Complex64::from_polar(1.0, 2.2)] {
            assert!((w_eval(&sol, z, &cfg()) - oracle).abs() <= 1e-8);
        }
        for r in [0.3, 2.0, 5.0, 12.0] {
            let w = w_eval(&sol, c(r, 0.0), &cfg());
            let o = bessel_i0_series(r);
            assert!((w - o).abs() <= 1e-13 * o, "r = {r}");
        }
    }

    #[test]
    fn rotation_invariance() {
        let sol = HelmholtzSolution::new(2.0).unwrap();
        let base = w_eval(&sol, c(1.7, 0.0), &cfg());
        for k in 0..12 {
            let z = Complex64::from_polar(1.7, 0.5 * k as f64);
            assert!((w_eval(&sol, z, &cfg()) - base).abs() <= 1e-10 * base);
        }
    }

    #[test]
    fn scaling_relation() {
        let one = HelmholtzSolution::new(1.0).unwrap();
        for lambda in [0.25, 3.0, 10.0] {
            let sol = HelmholtzSolution::new(lambda).unwrap();
            for z in [c(0.4, -1.1), c(2.0, 0.5)] {
                let a = w_eval(&sol, z, &cfg());
                let b = w_eval(&one, z * lambda.sqrt(), &cfg());
                assert!((a - b).abs() <= 1e-10 * a.max(1.0));
            }
        }
    }

    #[test]
    fn radial_monotonicity() {
        let sol = HelmholtzSolution::new(1.5).unwrap();
        let values: Vec<f64> = (0..40)
            .map(|k| w_eval(&sol, c(0.1 * k as f64, 0.0), &cfg()))
            .collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn invalid_lambda() {
        assert!(HelmholtzSolution::new(0.0).is_err());
        assert!(HelmholtzSolution::new(-1.0).is_err());
        assert!(HelmholtzSolution::new(f64::INFINITY).is_err());
    }

    #[test]
    fn residual_small_and_second_order() {
        let sol = HelmholtzSolution::new(1.0).unwrap();
        assert!(helmholtz_residual(&sol, c(0.0, 0.0), 1e-3).unwrap().abs() <= 1e-4);

        let sol = HelmholtzSolution::new(2.0).unwrap();
        let z = c(1.0, 1.0);
        let r1 = helmholtz_residual(&sol, z, 0.1).unwrap();
        let r2 = helmholtz_residual(&sol, z, 0.05).unwrap();
        let ratio = r1 / r2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        assert!(helmholtz_residual(&sol, z, 0.0).is_err());
    }

    #[test]
    fn residual_of_constant() {
        let r = stencil_residual(|_| 1.0, 1.0, c(0.3, 0.2), 0.01);
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        assert!(GridProblem::new(1.0, 0.3, 1.0, |_, _| 0.0, |_, _| 0.0).is_err());
        assert!(GridProblem::new(1.0, 0.25, 0.0, |_, _| 0.0, |_, _| 0.0).is_err());
        assert!(GridProblem::new(1.0, -0.25, 1.0, |_, _| 0.0, |_, _| 0.0).is_err());
        let p = GridProblem::new(1.0, 0.25, 1.0, |_, _| 0.0, |_, _| 0.0).unwrap();
        assert_eq!(p.points(), 9);
    }

    #[test]
    fn zero_data_gives_zero() {
        let p = GridProblem::new(2.0, 0.25, 1.0, |_, _| 0.0, |_, _| 0.0).unwrap();
        let u = barrier_solve(&p).unwrap();
        assert!(u.values.iter().all(|&v| v == 0.0));
        assert!(max_principle_check(&p, &u).unwrap().ok);
    }

    #[test]
    fn constant_source() {
        let cc = 1.0;
        let center = |r: f64| {
            let p = GridProblem::new(r, 0.1, cc, |_, _| cc, |_, _| 0.0).unwrap();
            let u = barrier_solve(&p).unwrap();
            assert!(p.residual_norm(&u).unwrap() <= SOLVER_TOLERANCE);
            assert!(u.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert!(max_principle_check(&p, &u).unwrap().ok);
            let mid = u.points_per_axis / 2;
            u.at(mid, mid)
        };
        let (a, b) = (center(2.0), center(5.0));
        assert!(b > a && b > 0.95, "{a} {b}");
    }

    #[test]
    fn perturbation_is_caught() {
        let cc = 2.0;
        let p = GridProblem::new(1.0, 0.125, cc, |_, _| cc, |_, _| 0.0).unwrap();
        let mut u = barrier_solve(&p).unwrap();
        *u.at_mut(5, 7) += 1.0;
        let report = max_principle_check(&p, &u).unwrap();
        assert!(!report.ok);
        assert_eq!(report.witness, Some((u.coordinate(5), u.coordinate(7))));
    }

    #[test]
    fn boundary_data_is_honored() {
        let p = GridProblem::new(1.0, 0.125, 0.5, |x, y| x * y, |x, y| 1.0 + x - y).unwrap();
        let u = barrier_solve(&p).unwrap();
        assert_eq!(u.at(0, 3), 1.0 + u.coordinate(0) - u.coordinate(3));
        assert!(p.residual_norm(&u).unwrap() <= SOLVER_TOLERANCE);
        assert!(max_principle_check(&p, &u).unwrap().ok);
    }

    #[test]
    fn csv_rows() {
        let p = GridProblem::new(1.0, 0.5, 1.0, |_, _| 1.0, |_, _| 0.0).unwrap();
        let u = barrier_solve(&p).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(lines.len(), 1 + 25);
        assert!(lines[1].starts_with("-1.0000000000000000e0,-1.0000000000000000e0,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn no_interior_maximum_for_nonpositive_source(
            g in prop::collection::vec(-3.0f64..=0.0, 4),
            bd in prop::collection::vec(-2.0f64..2.0, 3),
            cc in 0.1f64..5.0,
        ) {
            let p = GridProblem::new(
                1.0,
                0.125,
                cc,
                |x, y| g[0] + g[1] * x.abs() + g[2] * y.abs() + g[3] * (x * y).abs(),
                |x, y| bd[0] + bd[1] * x + bd[2] * y,
            )
            .unwrap();
            let u = barrier_solve(&p).unwrap();
            let m = u.points_per_axis;
            let mut boundary_max = f64::NEG_INFINITY;
            let mut interior_max = f64::NEG_INFINITY;
            for j in 0..m {
                for i in 0..m {
                    if u.is_boundary(i, j) {
                        boundary_max = boundary_max.max(u.at(i, j));
                    } else {
                        interior_max = interior_max.max(u.at(i, j));
                    }
                }
            }
            prop_assert!(interior_max <= boundary_max.max(0.0) + 1e-9);
            prop_assert!(max_principle_check(&p, &u).unwrap().ok);
        }
    }
}
