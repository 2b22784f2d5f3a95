//! Oracles computed independently of the library code paths.
#![allow(dead_code)]

use num_complex::Complex64;
use quadrature::double_exponential;

fn integrate_complex(f: impl Fn(f64) -> Complex64, a: f64, b: f64) -> Complex64 {
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    let re = double_exponential::integrate(|s| f(s).re, a, b, 1e-15).integral;
    let im = double_exponential::integrate(|s| f(s).im, a, b, 1e-15).integral;
    Complex64::new(re, im)
}

/// `∫₀^∞ k±(x, s) e^{−zs} ds` with `k± = (e^{−ω|x−s|} ± e^{−ω(x+s)})/(2ω)`,
/// split at the kink `s = x` and truncated where the integrand is below
/// `e^{−40}` of its peak.
pub fn kernel_integral(omega: Complex64, z: f64, x: f64, sign: f64) -> Complex64 {
    // the integrand is bounded by e^{−cx}/|ω|; dividing it out keeps the
    // absolute quadrature tolerance meaningful for large x
    let c = omega.re.min(z);
    let k = |s: f64| {
        let a = (-omega * (x - s).abs() + c * x).exp();
        let b = (-omega * (x + s) + c * x).exp();
        (a + sign * b) / (2.0 * omega) * (-z * s).exp()
    };
    let tail = x + 40.0 / (omega.re + z);
    (integrate_complex(k, 0.0, x) + integrate_complex(k, x, tail)) * (-c * x).exp()
}

/// Velocity and pressure of the half-space problem at height `x` for a
/// single tangential direction `ξ′ = z`, from the pressure trace and the
/// boundary traces by direct quadrature of the representation formula.
pub struct QuadratureProfile {
    pub velocity: [Complex64; 2],
    pub pressure: Complex64,
    /// Sum of the moduli of the contributions, for relative comparisons.
    pub scale: [f64; 2],
}

pub fn quadrature_profile(
    lambda: Complex64,
    z: f64,
    p0: Complex64,
    phi_t: Complex64,
    phi_n: Complex64,
    x: f64,
) -> QuadratureProfile {
    let omega = (lambda + z * z).sqrt();
    let i = Complex64::new(0.0, 1.0);
    let decay = (-omega * x).exp();
    let a = -i * z * p0 * kernel_integral(omega, z, x, 1.0);
    let b = z * p0 * kernel_integral(omega, z, x, -1.0);
    QuadratureProfile {
        velocity: [a + phi_t * decay, b + phi_n * decay],
        pressure: p0 * (-z * x).exp(),
        scale: [a.norm() + (phi_t * decay).norm(), b.norm() + (phi_n * decay).norm()],
    }
}

/// The five-case table of principal parts of `z²m + λω²(ω+z)`, with
/// `m₀ = λ² + αz⁴ + γλz²`.
pub fn principal_part_table(alpha: f64, gamma: f64, r: f64, lambda: Complex64, z: f64) -> Complex64 {
    let z2 = z * z;
    let m0 = lambda * lambda + alpha * z2 * z2 + gamma * lambda * z2;
    let l52 = lambda * lambda * lambda.sqrt();
    if r < 2.0 {
        Complex64::new(alpha * z2 * z2 * z2, 0.0)
    } else if r == 2.0 {
        m0 * z2
    } else if r < 4.0 {
        lambda * lambda * z2
    } else if r == 4.0 {
        lambda * lambda * z2 + l52
    } else {
        l52
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    num / den
}
