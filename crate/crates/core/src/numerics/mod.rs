//! Shared numerical kernels: adaptive quadrature (1D, disks, annuli and
//! lattice parallelograms), deterministic sup search and finite-difference
//! stencils.

mod cubature;
mod quadrature;
mod stencil;
mod sup_search;

use thiserror::Error;

pub(crate) use cubature::ring_integral;
pub use cubature::{integrate_annulus, integrate_disk, integrate_parallelogram};
pub(crate) use quadrature::panel_rule;
pub use quadrature::{integrate_1d, QuadratureConfig, SingularitySubstitution};
pub use stencil::laplacian_5pt;
pub use sup_search::{sup_search, Rect, SupResult, SupSearchConfig};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not converge after {subdivisions} subdivisions: value {value:e}, error estimate {error:e}")]
    NotConverged {
        value: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("invalid quadrature config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericsError {
    #[error("degenerate search rectangle {0:?}")]
    DegenerateRect(Rect),
    #[error("invalid sup-search config: {0}")]
    InvalidConfig(String),
}
