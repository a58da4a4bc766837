//! Run configuration, read from JSON. Every section and field is optional
//! and falls back to its default; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::numerics::{QuadratureConfig, SupSearchConfig};
use crate::widim::WindowKind;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Seeds every randomized step (sup-search jitter, sample points,
    /// random formula inputs).
    pub seed: u64,
    pub quadrature: Tolerances,
    pub sup_search: SupSearchSettings,
    pub extremal: ExtremalSettings,
    pub characteristic: CharacteristicSettings,
    pub widim: WidimSettings,
    pub helmholtz: HelmholtzSettings,
    pub output: OutputSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 20_240_601,
            quadrature: Tolerances::default(),
            sup_search: SupSearchSettings::default(),
            extremal: ExtremalSettings::default(),
            characteristic: CharacteristicSettings::default(),
            widim: WidimSettings::default(),
            helmholtz: HelmholtzSettings::default(),
            output: OutputSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_subdivisions: 2000,
        }
    }
}

impl Tolerances {
    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            ..QuadratureConfig::default()
        }
    }

    fn validate(&self, section: &str) -> Result<(), CliError> {
        self.quadrature()
            .validate()
            .map_err(|e| CliError::Config(format!("{section}: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupSearchSettings {
    pub initial_grid: usize,
    pub refinement_levels: usize,
    pub shrink_factor: f64,
    pub restarts: usize,
}

impl Default for SupSearchSettings {
    fn default() -> Self {
        let d = SupSearchConfig::default();
        Self {
            initial_grid: d.initial_grid,
            refinement_levels: d.refinement_levels,
            shrink_factor: d.shrink_factor,
            restarts: d.restarts,
        }
    }
}

impl SupSearchSettings {
    pub fn search_config(&self, seed: u64) -> SupSearchConfig {
        SupSearchConfig {
            initial_grid: self.initial_grid,
            refinement_levels: self.refinement_levels,
            shrink_factor: self.shrink_factor,
            restarts: self.restarts,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtremalSettings {
    /// Points per axis of the `|df|` field table.
    pub field_grid: usize,
    /// Random points at which the differential equation is checked.
    pub ode_samples: usize,
}

impl Default for ExtremalSettings {
    fn default() -> Self {
        Self {
            field_grid: 48,
            ode_samples: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CharacteristicSettings {
    pub r_max: f64,
    /// Rows of the profile, geometrically spaced in `[1, r_max]`.
    pub samples: usize,
    pub tolerances: Tolerances,
}

impl Default for CharacteristicSettings {
    fn default() -> Self {
        Self {
            r_max: 50.0,
            samples: 16,
            tolerances: Tolerances {
                abs_tol: 1e-8,
                rel_tol: 1e-8,
                max_subdivisions: 2000,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct WidimSettings {
    pub cube: CubeSettings,
    pub shift: ShiftSettings,
    pub residual: ResidualSettings,
    pub formula: FormulaSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CubeSettings {
    pub d: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub s: u32,
}

impl Default for CubeSettings {
    fn default() -> Self {
        Self { d: 2, n: 3, s: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShiftSettings {
    /// Dimension `D` of the alphabet `[0,1]^D`.
    pub dim: u32,
    pub unit_cells: u32,
    pub eps_cells: u32,
    pub windows: Vec<u32>,
}

impl Default for ShiftSettings {
    fn default() -> Self {
        Self {
            dim: 1,
            unit_cells: 3,
            eps_cells: 2,
            windows: vec![1, 2, 3],
        }
    }
}

impl ShiftSettings {
    pub fn kind(&self) -> WindowKind {
        WindowKind::FullShift { dim: self.dim }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResidualSettings {
    pub unit_cells: u32,
    pub eps_cells: u32,
    pub windows: Vec<u32>,
    /// Largest period in the fixed-point dimension table.
    pub max_period: u32,
}

impl Default for ResidualSettings {
    fn default() -> Self {
        Self {
            unit_cells: 4,
            eps_cells: 2,
            windows: vec![1, 2, 3, 4],
            max_period: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FormulaSettings {
    /// Projective dimension `N`.
    pub proj_dim: i64,
    pub deg: i64,
    pub n: i64,
    /// Upper mean energy used in the upper bound.
    pub e_sup: f64,
}

impl Default for FormulaSettings {
    fn default() -> Self {
        Self {
            proj_dim: 1,
            deg: 2,
            n: 1,
            e_sup: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HelmholtzSettings {
    pub lambda: f64,
    /// Radii of the `w_λ` sample table.
    pub radii: Vec<f64>,
    pub residual_lambda: f64,
    pub residual_point: [f64; 2],
    /// Decreasing stencil spacings for the convergence table.
    pub spacings: Vec<f64>,
    pub barrier: BarrierSettings,
}

impl Default for HelmholtzSettings {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            radii: vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0],
            residual_lambda: 2.0,
            residual_point: [1.0, 1.0],
            spacings: vec![0.1, 0.05, 0.025],
            barrier: BarrierSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarrierSettings {
    pub half_width: f64,
    pub spacing: f64,
    pub c: f64,
}

impl Default for BarrierSettings {
    fn default() -> Self {
        Self {
            half_width: 4.0,
            spacing: 0.1,
            c: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSettings {
    pub dir: Option<PathBuf>,
    pub json: bool,
    pub csv: bool,
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_json_str(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.quadrature.validate("quadrature")?;
        self.characteristic
            .tolerances
            .validate("characteristic.tolerances")?;
        self.sup_search
            .search_config(self.seed)
            .validate()
            .map_err(|e| CliError::Config(format!("sup_search: {e}")))?;
        if self.extremal.field_grid < 2 {
            return bad("extremal.field_grid must be >= 2");
        }
        let ch = &self.characteristic;
        if !(ch.r_max >= 1.0 && ch.r_max.is_finite()) {
            return bad("characteristic.r_max must be finite and >= 1");
        }
        if ch.samples < 4 {
            return bad("characteristic.samples must be >= 4");
        }
        let w = &self.widim;
        if w.cube.d < 1 || w.cube.s < 1 || w.cube.s > w.cube.n {
            return bad("widim.cube needs d >= 1 and 1 <= s <= N");
        }
        if w.shift.dim < 1 || w.shift.unit_cells < 1 || w.shift.eps_cells < 1 {
            return bad("widim.shift needs dim, unit_cells and eps_cells >= 1");
        }
        if w.residual.unit_cells < 1 || w.residual.eps_cells < 1 || w.residual.max_period < 1 {
            return bad("widim.residual needs unit_cells, eps_cells and max_period >= 1");
        }
        if w.shift
            .windows
            .iter()
            .chain(&w.residual.windows)
            .any(|&n| n < 1)
        {
            return bad("window lengths must be >= 1");
        }
        let h = &self.helmholtz;
        if !(h.lambda > 0.0 && h.residual_lambda > 0.0) {
            return bad("helmholtz lambdas must be positive");
        }
        if h.radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return bad("helmholtz.radii must be finite and non-negative");
        }
        if h.spacings.len() < 2 || h.spacings.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return bad("helmholtz.spacings needs at least two positive values");
        }
        let b = &h.barrier;
        if !(b.half_width > 0.0 && b.spacing > 0.0 && b.c > 0.0) {
            return bad("helmholtz.barrier needs positive half_width, spacing and c");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn round_trip_is_lossless() {
        let mut cfg = RunConfig::default();
        cfg.seed = 7;
        cfg.quadrature.abs_tol = 1.234_567_890_123_456_7e-13;
        cfg.helmholtz.radii = vec![0.1, 1.0 / 3.0];
        cfg.output.dir = Some(PathBuf::from("out/dir"));
        let text = cfg.to_json_string();
        assert_eq!(RunConfig::from_json_str(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg =
            RunConfig::from_json_str(r#"{"seed": 3, "quadrature": {"abs_tol": 1e-9}}"#).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.quadrature.abs_tol, 1e-9);
        assert_eq!(cfg.quadrature.rel_tol, Tolerances::default().rel_tol);
        assert_eq!(cfg.widim, WidimSettings::default());
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            r#"{"unknown": 1}"#,
            r#"{"quadrature": {"abs_tol": 1e-9, "typo": 2}}"#,
            r#"{"schema_version": 2}"#,
            r#"{"quadrature": {"abs_tol": 0.0}}"#,
            r#"{"quadrature": {"rel_tol": -1.0}}"#,
            r#"{"characteristic": {"r_max": 0.5}}"#,
            r#"{"widim": {"cube": {"d": 2, "N": 3, "s": 4}}}"#,
            r#"{"helmholtz": {"spacings": [0.1]}}"#,
            r#"not json"#,
        ] {
            assert!(
                matches!(RunConfig::from_json_str(text), Err(CliError::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn tiny_tolerances_are_accepted() {
        let cfg =
            RunConfig::from_json_str(r#"{"quadrature": {"abs_tol": 1e-30, "rel_tol": 1e-30}}"#)
                .unwrap();
        assert_eq!(cfg.quadrature.abs_tol, 1e-30);
    }
}
