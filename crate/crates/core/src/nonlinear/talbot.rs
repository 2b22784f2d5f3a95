//! Reference plate response of one tangential mode by numerical Laplace
//! inversion of `η̂ = T(λ, z) f̂_η(λ)` along a cotangent contour.

use super::data::TimeProfile;
use super::NonlinearError;
use crate::resolvent::{eta_transfer, Coupling};
use crate::symbol::{Freq, PlateParams};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourSpec {
    /// Quadrature nodes on the contour (even).
    pub nodes: usize,
    /// Allowed relative change when the node count doubles.
    pub tol: f64,
    /// Absolute floor for the relative comparison.
    pub floor: f64,
    pub coupling: Coupling,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec { nodes: 32, tol: 1e-8, floor: 1e-14, coupling: Coupling::Exact }
    }
}

fn invert(
    params: &PlateParams,
    z: f64,
    profile: TimeProfile,
    t: f64,
    nodes: usize,
    coupling: Coupling,
) -> Result<f64, NonlinearError> {
    let h = 2.0 * PI / nodes as f64;
    let scale = nodes as f64 / t;
    let (a, b, c, d) = (-0.6122, 0.5017, 0.6407, 0.2645);
    let mut sum = Complex64::new(0.0, 0.0);
    // The integrand is conjugate symmetric, so only θ < 0 is summed.
    for k in 0..nodes / 2 {
        let th = -PI + (k as f64 + 0.5) * h;
        let cot = (c * th).tan().recip();
        let lam = scale * Complex64::new(a + b * th * cot, d * th);
        let dlam = scale * Complex64::new(b * cot - b * c * th / (c * th).sin().powi(2), d);
        let f = Freq::new(lam, z).map_err(|e| NonlinearError::Contour(e.to_string()))?;
        let tr = eta_transfer(params, f, coupling).map_err(|e| NonlinearError::Contour(e.to_string()))?;
        sum += (lam * t).exp() * tr * profile.laplace(lam) * dlam;
    }
    Ok((2.0 * sum * h / Complex64::new(0.0, 2.0 * PI)).re)
}

/// `η(t)` at each requested time for plate forcing `profile(t)` on the mode
/// with `|ξ′| = z`, zero initial data. The result is checked against the same
/// quadrature with twice the nodes.
pub fn linear_inverse_laplace_reference(
    params: &PlateParams,
    z: f64,
    profile: TimeProfile,
    times: &[f64],
    spec: &ContourSpec,
) -> Result<Vec<f64>, NonlinearError> {
    if spec.nodes < 2 || spec.nodes % 2 != 0 {
        return Err(NonlinearError::Contour(format!("node count {} must be even", spec.nodes)));
    }
    times
        .iter()
        .map(|&t| {
            if t <= 0.0 {
                return Ok(0.0);
            }
            let coarse = invert(params, z, profile, t, spec.nodes, spec.coupling)?;
            let fine = invert(params, z, profile, t, 2 * spec.nodes, spec.coupling)?;
            let change = (coarse - fine).abs() / fine.abs().max(spec.floor);
            if !(change <= spec.tol) {
                return Err(NonlinearError::ContourFailure {
                    t,
                    nodes: spec.nodes,
                    change,
                    suggested: 2 * spec.nodes,
                });
            }
            Ok(coarse)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PlateParams {
        PlateParams::default()
    }

    #[test]
    fn step_forcing_reaches_the_static_deflection() {
        let z = 2.0 * PI;
        let eta = linear_inverse_laplace_reference(&params(), z, TimeProfile::Step, &[6.0], &ContourSpec::default())
            .unwrap();
        let static_limit = -1.0 / z.powi(4);
        assert!((eta[0] - static_limit).abs() < 1e-8 * static_limit.abs(), "{eta:?}");
        let printed = ContourSpec { coupling: Coupling::AsPrinted, ..ContourSpec::default() };
        let eta = linear_inverse_laplace_reference(&params(), z, TimeProfile::Step, &[6.0], &printed).unwrap();
        assert!((eta[0] - static_limit).abs() < 1e-6 * static_limit.abs());
    }

    #[test]
    fn causal_start_and_zero_forcing() {
        let z = 2.0 * PI;
        let spec = ContourSpec::default();
        for pr in [TimeProfile::Step, TimeProfile::Exp { rate: 1.0 }, TimeProfile::Ramp] {
            let eta = linear_inverse_laplace_reference(&params(), z, pr, &[0.0, 1e-4], &spec).unwrap();
            assert_eq!(eta[0], 0.0);
            assert!(eta[1].abs() < 1e-6, "{pr:?} {eta:?}");
        }
        let zero = TimeProfile::Sin { freq: 0.0 };
        let eta = linear_inverse_laplace_reference(&params(), z, zero, &[0.5, 1.0], &spec).unwrap();
        assert!(eta.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn tight_tolerance_reports_contour_failure() {
        let spec = ContourSpec { nodes: 8, tol: 1e-14, ..ContourSpec::default() };
        let err = linear_inverse_laplace_reference(&params(), 4.0 * PI, TimeProfile::Step, &[1.0], &spec).unwrap_err();
        assert!(matches!(err, NonlinearError::ContourFailure { suggested: 16, .. }));
    }
}
