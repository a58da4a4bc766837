//! Python bindings: the extremal curve, mean energy and characteristic,
//! cover search, dimension formulas, the Helmholtz barrier function and the
//! command reports.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use meandim_core::cli::{self, RunConfig, WidimCommand};
use meandim_core::elliptic::{CurveValue, ExtremalBrodyCurve};
use meandim_core::helmholtz::{self, HelmholtzSolution};
use meandim_core::nevanlinna;
use meandim_core::numerics::{QuadratureConfig, SupSearchConfig};
use meandim_core::widim::{self, CoverInstance, CoverSolution, WidimError, WindowKind};

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn widim_err(e: WidimError) -> PyErr {
    match e {
        WidimError::InvalidInstance(_)
        | WidimError::InvalidArgument(_)
        | WidimError::DegenerateBricks(_) => PyValueError::new_err(e.to_string()),
        other => runtime_err(other),
    }
}

fn quadrature(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> PyResult<QuadratureConfig> {
    QuadratureConfig::new(abs_tol, rel_tol, max_subdivisions)
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// The equianharmonic elliptic Brody curve with `sup |df| = 1`.
#[pyclass(name = "ExtremalCurve", frozen)]
struct PyExtremalCurve {
    inner: ExtremalBrodyCurve,
}

#[pymethods]
impl PyExtremalCurve {
    #[new]
    #[pyo3(signature = (abs_tol=1e-11, rel_tol=1e-11, max_subdivisions=2000))]
    fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> PyResult<Self> {
        let cfg = quadrature(abs_tol, rel_tol, max_subdivisions)?;
        let inner = ExtremalBrodyCurve::build(&cfg).map_err(runtime_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn k(&self) -> f64 {
        self.inner.k()
    }

    #[getter]
    fn elliptic_integral(&self) -> f64 {
        self.inner.elliptic_integral()
    }

    #[getter]
    fn omega1(&self) -> f64 {
        self.inner.omega1()
    }

    #[getter]
    fn omega2(&self) -> Complex64 {
        self.inner.omega2()
    }

    #[getter]
    fn lattice_area(&self) -> f64 {
        self.inner.lattice().area()
    }

    /// `f(z)`, or `None` at a pole.
    fn value(&self, z: Complex64) -> Option<Complex64> {
        match self.inner.eval(z) {
            CurveValue::Finite { f, .. } => Some(f),
            CurveValue::PoleChart { g, .. } if g.norm() == 0.0 => None,
            CurveValue::PoleChart { g, .. } => Some(g.inv()),
        }
    }

    /// `|df|(z)`.
    fn spherical_derivative(&self, z: Complex64) -> f64 {
        self.inner.spherical_derivative(z)
    }

    fn ode_residual(&self, z: Complex64) -> f64 {
        self.inner.ode_residual(z)
    }

    /// Mean energy by quadrature over the fundamental domain.
    #[pyo3(signature = (abs_tol=1e-11, rel_tol=1e-11, max_subdivisions=2000))]
    fn mean_energy(&self, abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> PyResult<f64> {
        let cfg = quadrature(abs_tol, rel_tol, max_subdivisions)?;
        nevanlinna::mean_energy_periodic(&self.inner, &cfg).map_err(runtime_err)
    }

    /// `[(r, T(r), 2T/(πr²)), ...]` on `samples` radii up to `r_max`.
    #[pyo3(signature = (r_max, samples=16, tol=1e-8))]
    fn characteristic(
        &self,
        py: Python<'_>,
        r_max: f64,
        samples: usize,
        tol: f64,
    ) -> PyResult<Vec<(f64, f64, f64)>> {
        let cfg = quadrature(tol, tol, 2000)?;
        let profile = py
            .detach(|| nevanlinna::characteristic(&self.inner, r_max, samples, &cfg))
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(profile.rows.iter().map(|r| (r.r, r.t, r.ratio)).collect())
    }

    /// Largest `|df|` found on the fundamental domain and where.
    #[pyo3(signature = (seed=0))]
    fn sup_spherical_derivative(&self, seed: u64) -> PyResult<(f64, Complex64)> {
        let cfg = SupSearchConfig {
            seed,
            ..SupSearchConfig::default()
        };
        let domain = nevanlinna::fundamental_box(self.inner.lattice());
        let found = nevanlinna::brody_check(&self.inner, &domain, &cfg).map_err(runtime_err)?;
        Ok((found.sup_found, found.argmax))
    }

    fn __repr__(&self) -> String {
        format!(
            "ExtremalCurve(omega1={}, lattice_area={})",
            self.inner.omega1(),
            self.inner.lattice().area()
        )
    }
}

fn solution_dict<'py>(py: Python<'py>, sol: &CoverSolution) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("multiplicity", sol.multiplicity)?;
    d.set_item("widim_bound", sol.widim_bound)?;
    let boxes: Vec<Vec<(u32, u32)>> = sol
        .boxes
        .iter()
        .map(|b| b.intervals.iter().map(|&[lo, hi]| (lo, hi)).collect())
        .collect();
    d.set_item("boxes", boxes)?;
    Ok(d)
}

/// Exact minimal-multiplicity cover of `[0, N]^d` by closed boxes of side
/// at most `s`.
#[pyfunction]
fn min_multiplicity_cover<'py>(
    py: Python<'py>,
    d: u32,
    n: u32,
    s: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let inst = CoverInstance::cube(d, n, s).map_err(widim_err)?;
    let sol = py
        .detach(|| widim::min_multiplicity_cover(&inst))
        .map_err(widim_err)?;
    solution_dict(py, &sol)
}

/// Shifted-brick cover of `[0, N]^d` with multiplicity `d + 1`.
#[pyfunction]
fn brick_cover<'py>(py: Python<'py>, d: u32, n: u32, s: u32) -> PyResult<Bound<'py, PyDict>> {
    let sol = py
        .detach(|| widim::brick_cover(d, n, s))
        .map_err(widim_err)?;
    solution_dict(py, &sol)
}

/// `[(n, widim_bound, ratio), ...]` for `kind` in `{"shift", "residual"}`.
#[pyfunction]
#[pyo3(signature = (kind, unit_cells, eps_cells, windows, dim=1))]
fn mean_dim_slope(
    kind: &str,
    unit_cells: u32,
    eps_cells: u32,
    windows: Vec<u32>,
    dim: u32,
) -> PyResult<Vec<(u32, u32, f64)>> {
    let kind = match kind {
        "shift" => WindowKind::FullShift { dim },
        "residual" => WindowKind::Residual,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown window kind {other:?}"
            )))
        }
    };
    let rows = widim::mean_dim_slope(kind, unit_cells, eps_cells, &windows).map_err(widim_err)?;
    Ok(rows.iter().map(|r| (r.n, r.widim_bound, r.ratio)).collect())
}

#[pyfunction]
fn residual_fixedpoint_dim(n: u32) -> PyResult<u32> {
    widim::residual_fixedpoint_dim(n).map_err(widim_err)
}

/// `2 n² (N + 1) deg`.
#[pyfunction]
fn riemann_roch_dim(proj_dim: i64, deg: i64, n: i64) -> PyResult<u64> {
    widim::riemann_roch_dim(proj_dim, deg, n).map_err(widim_err)
}

/// `(2 e_ell (N + 1), 4 e_sup N)`.
#[pyfunction]
fn theorem1_bounds(proj_dim: i64, e_ell: f64, e_sup: f64) -> PyResult<(f64, f64)> {
    widim::theorem1_bounds(proj_dim, e_ell, e_sup).map_err(widim_err)
}

/// `w_λ(z)`, the angular average of `exp(√λ (x cos θ + y sin θ))`.
#[pyfunction]
#[pyo3(signature = (lam, z, tol=1e-13))]
fn w_eval(lam: f64, z: Complex64, tol: f64) -> PyResult<f64> {
    let sol = HelmholtzSolution::new(lam).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let cfg = quadrature(tol, tol, 2000)?;
    Ok(helmholtz::w_eval(&sol, z, &cfg))
}

/// Five-point value of `(-Δ + λ) w_λ` at `z`.
#[pyfunction]
fn helmholtz_residual(lam: f64, z: Complex64, h: f64) -> PyResult<f64> {
    let sol = HelmholtzSolution::new(lam).map_err(|e| PyValueError::new_err(e.to_string()))?;
    helmholtz::helmholtz_residual(&sol, z, h).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn config_from(config_json: Option<&str>) -> PyResult<RunConfig> {
    match config_json {
        Some(text) => {
            RunConfig::from_json_str(text).map_err(|e| PyValueError::new_err(e.to_string()))
        }
        None => Ok(RunConfig::default()),
    }
}

/// Runs a command (`extremal`, `characteristic`, `helmholtz`, `widim cube`,
/// `widim shift`, `widim residual`, `widim formula` or `verify`) and
/// returns its report as a JSON string.
#[pyfunction]
#[pyo3(signature = (command, config_json=None))]
fn run_report(py: Python<'_>, command: &str, config_json: Option<&str>) -> PyResult<String> {
    let cfg = config_from(config_json)?;
    let doc = py.detach(|| match command {
        "extremal" => cli::cmd_extremal(&cfg),
        "characteristic" => cli::cmd_characteristic(&cfg),
        "helmholtz" => cli::cmd_helmholtz(&cfg),
        "widim cube" => cli::cmd_widim(&cfg, WidimCommand::Cube),
        "widim shift" => cli::cmd_widim(&cfg, WidimCommand::Shift),
        "widim residual" => cli::cmd_widim(&cfg, WidimCommand::Residual),
        "widim formula" => cli::cmd_widim(&cfg, WidimCommand::Formula),
        "verify" => Ok(cli::cmd_verify(&cfg).report),
        other => Err(cli::CliError::Config(format!("unknown command {other:?}"))),
    });
    match doc {
        Ok(mut doc) => {
            if doc.stamps.timestamp.is_empty() {
                doc.stamp();
            }
            Ok(doc.to_json())
        }
        Err(e) if e.exit_code() == 2 => Err(PyValueError::new_err(e.to_string())),
        Err(e) => Err(runtime_err(e)),
    }
}

#[pymodule]
fn meandim_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExtremalCurve>()?;
    m.add_function(wrap_pyfunction!(min_multiplicity_cover, m)?)?;
    m.add_function(wrap_pyfunction!(brick_cover, m)?)?;
    m.add_function(wrap_pyfunction!(mean_dim_slope, m)?)?;
    m.add_function(wrap_pyfunction!(residual_fixedpoint_dim, m)?)?;
    m.add_function(wrap_pyfunction!(riemann_roch_dim, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(w_eval, m)?)?;
    m.add_function(wrap_pyfunction!(helmholtz_residual, m)?)?;
    m.add_function(wrap_pyfunction!(run_report, m)?)?;
    Ok(())
}
