//! Time-domain machinery on a periodic strip: the flattening transform, the
//! nonlinear terms, compatibility checks, a mode-wise linear stepper with a
//! contour-integral reference, and the fixed-point iteration for the full
//! system.

pub mod compat;
pub mod data;
pub mod fixed_point;
pub mod grid;
pub mod spectral;
pub mod stepper;
pub mod talbot;
pub mod terms;
pub mod transform;

pub use compat::{check_compatibility, CompatReport, CompatStatus};
pub use data::{ProblemData, Separable, State, TimeProfile};
pub use fixed_point::{fixed_point_solve, FixedPointOptions, FixedPointOutcome};
pub use grid::{Grid, Mesh};
pub use spectral::Spectral;
pub use stepper::{linear_step, LinearStepper, StepRhs};
pub use talbot::{linear_inverse_laplace_reference, ContourSpec};
pub use terms::{eval_fv, eval_g, eval_h_eta, eval_nonlinearity, Nonlinearity};
pub use transform::{normal_vector, transform_pullback, transform_pushforward};

use crate::exec::Execution;
use crate::polygon::Rational;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonlinearError {
    #[error("invalid grid parameter {name} = {value}: {reason}")]
    InvalidGrid { name: &'static str, value: f64, reason: &'static str },
    #[error("{what} has length {got}, expected {want}")]
    ShapeMismatch { what: &'static str, got: usize, want: usize },
    #[error("plate displacement {sup} exceeds the admissible shift {limit}")]
    ShiftOutOfRange { sup: f64, limit: f64 },
    #[error("mode {mode} system is singular (pivot ratio {condition:e}); refine dt or M")]
    SolverSingular { mode: usize, condition: f64 },
    #[error("non-finite field at t = {t}")]
    NonFinite { t: f64 },
    #[error("contour evaluation failed: {0}")]
    Contour(String),
    #[error("contour quadrature not converged at t = {t} with {nodes} nodes (relative change {change:e}); try {suggested} nodes")]
    ContourFailure { t: f64, nodes: usize, change: f64, suggested: usize },
    #[error("integrability index p = {p} is below the required {required}")]
    IndexBelowThreshold { p: Rational, required: Rational },
    #[error("no contraction after {iterations} iterations (ratios {ratios:?}); reduce the data size")]
    NoContraction { iterations: usize, ratios: Vec<f64> },
}

/// Grid, collocation operators and FFT plans shared by all operations.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub mesh: Mesh,
    pub spectral: Spectral,
}

impl Discretization {
    pub fn new(grid: Grid, exec: Execution) -> Result<Self, NonlinearError> {
        Ok(Discretization { mesh: Mesh::new(grid)?, spectral: Spectral::new(grid, exec) })
    }

    pub fn grid(&self) -> Grid {
        self.mesh.grid
    }
}
