//! Numerical toolkit for an incompressible Stokes/Navier-Stokes flow in a
//! half-space coupled to a structurally damped Kirchhoff plate.
//!
//! * [`symbol`]: plate symbol, Stokes root and coupled boundary symbol.
//! * [`polygon`]: Newton polygons of mixed-order symbols, principal parts,
//!   sector non-vanishing checks.
//! * [`sobolev`]: anisotropic Sobolev indices and product embedding rules.
//! * [`resolvent`]: explicit Fourier-Laplace solution of the linear problem.
//! * [`nonlinear`]: flattening transform, nonlinear terms, time stepping and
//!   the fixed-point iteration.

pub mod exec;
pub mod nonlinear;
pub mod polygon;
pub mod resolvent;
pub mod sobolev;
pub mod symbol;

pub use exec::Execution;
pub use symbol::{Freq, PlateParams, Sector};
