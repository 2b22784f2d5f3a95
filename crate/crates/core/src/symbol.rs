//! Plate symbol `m(λ,z) = λ² + αz⁴ + βz² + γλz²`, the Stokes root
//! `ω = √(λ+z²)` and the coupled boundary symbols.
//!
//! All fractional powers use the principal branch with argument in `(−π, π]`,
//! so a negative real radicand maps to `+i·√|w|` regardless of the sign of
//! its zero imaginary part.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("invalid plate parameter {name} = {value}: {reason}")]
    InvalidParams {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid sector angle {0} (expected 0 < angle <= pi)")]
    InvalidSector(f64),
    #[error("negative tangential frequency z = {0}")]
    NegativeFrequency(f64),
}

/// Plate coefficients; density and viscosity are normalised to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PlateParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, SymbolError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(SymbolError::InvalidParams {
                name: "alpha",
                value: alpha,
                reason: "must be positive and finite",
            });
        }
        if !beta.is_finite() {
            return Err(SymbolError::InvalidParams {
                name: "beta",
                value: beta,
                reason: "must be finite",
            });
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(SymbolError::InvalidParams {
                name: "gamma",
                value: gamma,
                reason: "must be positive and finite",
            });
        }
        Ok(PlateParams { alpha, beta, gamma })
    }

    /// `αz⁴ + βz²`, the static stiffness of a tangential mode.
    pub fn stiffness(&self, z: f64) -> f64 {
        let z2 = z * z;
        self.alpha * z2 * z2 + self.beta * z2
    }
}

impl Default for PlateParams {
    fn default() -> Self {
        PlateParams {
            alpha: 1.0,
            beta: 0.0,
            gamma: 1.0,
        }
    }
}

/// Frequency pair `(λ, z)` with `z = |ξ′| ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Freq {
    pub lambda: Complex64,
    pub z: f64,
}

impl Freq {
    pub fn new(lambda: Complex64, z: f64) -> Result<Self, SymbolError> {
        if !(z >= 0.0) {
            return Err(SymbolError::NegativeFrequency(z));
        }
        Ok(Freq { lambda, z })
    }
}

/// Open sector `Σ_φ = {ζ ≠ 0 : |arg ζ| < φ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub vertex_angle: f64,
}

impl Sector {
    pub fn new(vertex_angle: f64) -> Result<Self, SymbolError> {
        if !(vertex_angle > 0.0 && vertex_angle <= PI) {
            return Err(SymbolError::InvalidSector(vertex_angle));
        }
        Ok(Sector { vertex_angle })
    }

    pub fn contains(&self, w: Complex64) -> bool {
        w != Complex64::new(0.0, 0.0) && w.arg().abs() < self.vertex_angle
    }
}

/// A value together with a flag raised when a square root was taken on the
/// negative real axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flagged {
    pub value: Complex64,
    pub branch_edge: bool,
}

/// Principal square root; the negative real axis maps to the upper
/// imaginary axis whatever the sign of the zero imaginary part.
pub fn principal_sqrt(w: Complex64) -> Complex64 {
    if w.im == 0.0 {
        if w.re >= 0.0 {
            Complex64::new(w.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-w.re).sqrt())
        }
    } else {
        w.sqrt()
    }
}

/// `λ^{k/2}` on the principal branch.
pub fn half_power(lambda: Complex64, k: u32) -> Complex64 {
    let whole = lambda.powu(k / 2);
    if k % 2 == 1 {
        whole * principal_sqrt(lambda)
    } else {
        whole
    }
}

pub fn eval_m(params: &PlateParams, f: Freq) -> Complex64 {
    let l = f.lambda;
    let z2 = f.z * f.z;
    l * l + params.stiffness(f.z) + params.gamma * l * z2
}

/// Roots of `λ ↦ m(λ, z)`, returned as `(−γz²/2 + √D, −γz²/2 − √D)`.
pub fn roots_m(params: &PlateParams, z: f64) -> [Complex64; 2] {
    let b = params.gamma * z * z;
    let c = params.stiffness(z);
    let disc = Complex64::new(b * b / 4.0 - c, 0.0);
    let s = principal_sqrt(disc);
    // -b/2 - s never cancels since b >= 0 and Re s >= 0.
    let big = Complex64::new(-b / 2.0, 0.0) - s;
    if big.norm() == 0.0 {
        return [Complex64::new(0.0, 0.0); 2];
    }
    let small = c / big;
    [small, big]
}

/// Half-opening of the smallest sector around the negative real axis that
/// contains the roots of the principal plate symbol.
pub fn sector_angle_phi0(params: &PlateParams) -> f64 {
    let g = params.gamma;
    let s = principal_sqrt(Complex64::new(g * g - 4.0 * params.alpha, 0.0));
    let c1 = Complex64::new(-g, 0.0) - s;
    let c2 = Complex64::new(-g, 0.0) + s;
    let min_arg = c1.arg().abs().min(c2.arg().abs());
    PI - min_arg
}

pub fn eval_omega(f: Freq) -> Flagged {
    let w = f.lambda + f.z * f.z;
    Flagged {
        value: principal_sqrt(w),
        branch_edge: w.im == 0.0 && w.re < 0.0,
    }
}

/// `N_L = z²m + λω²(ω+z)`.
pub fn eval_nl(params: &PlateParams, f: Freq) -> Flagged {
    let om = eval_omega(f);
    let z = f.z;
    let w2 = f.lambda + z * z;
    Flagged {
        value: z * z * eval_m(params, f) + f.lambda * w2 * (om.value + z),
        branch_edge: om.branch_edge,
    }
}

/// `N_E = z·m − λω(ω+z)`, the boundary symbol obtained when the divergence
/// constraint is imposed on the full velocity profile.
pub fn eval_ne(params: &PlateParams, f: Freq) -> Flagged {
    let om = eval_omega(f);
    let z = f.z;
    Flagged {
        value: z * eval_m(params, f) - f.lambda * om.value * (om.value + z),
        branch_edge: om.branch_edge,
    }
}
