//! Explicit solution of the linear resolvent problem in Fourier-Laplace
//! variables,
//!
//! ```text
//! λv − Δv + ∇p = 0,  div v = 0      in x_n > 0
//! v′ = 0,  λη − vⁿ = 0,  p − 2∂ₙvⁿ − m(λ,z)η = f_η   on x_n = 0
//! ```
//!
//! for one tangential wave vector `ξ′` with `z = |ξ′|`. The pressure is
//! `p̂₀e^{−z xₙ}` and the velocity is a combination of `e^{−z xₙ}`,
//! `e^{−ω xₙ}` and `D(xₙ) = (e^{−z xₙ} − e^{−ω xₙ})/(ω − z)`.
//!
//! Two ways of closing the boundary relations are provided. [`Coupling::Exact`]
//! imposes `div v = 0` on the whole profile, which leads to the boundary
//! symbol `N_E = z·m − λω(ω+z)`. [`Coupling::AsPrinted`] uses
//! `iξ′·φ̂′ = ωφ̂ⁿ`, which leads to `N_L = z²m + λω²(ω+z)`; its profiles
//! carry a divergence `(z p̂₀/ω)e^{−ω xₙ}` and a nonzero `∂ₙv̂ⁿ(0)`.

use crate::symbol::{eval_m, eval_ne, eval_nl, eval_omega, Freq, PlateParams};
use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResolventError {
    #[error("boundary symbol nearly vanishes at lambda = {lambda}, z = {z}: |N| = {modulus:e}, scale = {scale:e}")]
    NearResonance {
        lambda: Complex64,
        z: f64,
        modulus: f64,
        scale: f64,
    },
    #[error("wave vector length {norm} does not match z = {z}")]
    WaveVectorMismatch { norm: f64, z: f64 },
    #[error("Stokes root has no decay (Re omega = {0})")]
    NonDecaying(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Coupling {
    #[default]
    Exact,
    AsPrinted,
}

/// Relative size below which the boundary symbol counts as vanishing.
pub const RESONANCE_EPS: f64 = 1e-10;

fn boundary_symbol(params: &PlateParams, f: Freq, coupling: Coupling) -> (Complex64, f64) {
    let om = eval_omega(f).value;
    let z = f.z;
    let m = eval_m(params, f);
    match coupling {
        Coupling::Exact => {
            let scale = (z * m).norm() + (f.lambda * om * (om + z)).norm();
            (eval_ne(params, f).value, scale)
        }
        Coupling::AsPrinted => {
            let scale = (z * z * m).norm() + (f.lambda * om * om * (om + z)).norm();
            (eval_nl(params, f).value, scale)
        }
    }
}

fn check_resonance(params: &PlateParams, f: Freq, coupling: Coupling) -> Result<Complex64, ResolventError> {
    let (n, scale) = boundary_symbol(params, f, coupling);
    if !(n.norm() > RESONANCE_EPS * scale) {
        return Err(ResolventError::NearResonance {
            lambda: f.lambda,
            z: f.z,
            modulus: n.norm(),
            scale,
        });
    }
    Ok(n)
}

/// Transfer function `η̂/f̂_η`: `−z/N_E` or `−z²/N_L`.
pub fn eta_transfer(params: &PlateParams, f: Freq, coupling: Coupling) -> Result<Complex64, ResolventError> {
    let n = check_resonance(params, f, coupling)?;
    Ok(match coupling {
        Coupling::Exact => -f.z / n,
        Coupling::AsPrinted => -(f.z * f.z) / n,
    })
}

pub fn solve_eta(
    params: &PlateParams,
    f: Freq,
    f_eta_hat: Complex64,
    coupling: Coupling,
) -> Result<Complex64, ResolventError> {
    if f_eta_hat.is_zero() {
        return Ok(Complex64::zero());
    }
    Ok(eta_transfer(params, f, coupling)? * f_eta_hat)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceSolution {
    pub eta_hat: Complex64,
    pub p0_hat: Complex64,
    pub phi_prime_hat: Vec<Complex64>,
    pub phi_n_hat: Complex64,
    pub omega: Complex64,
    pub xi: Vec<f64>,
    pub lambda: Complex64,
    pub coupling: Coupling,
    /// `z = 0`: the pressure trace is the symbolic limit.
    pub degenerate: bool,
}

impl TraceSolution {
    fn xi_dot_phi(&self) -> Complex64 {
        self.xi
            .iter()
            .zip(&self.phi_prime_hat)
            .map(|(x, p)| I * *x * p)
            .sum()
    }

    fn z(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `iξ′·φ̂′ − ωφ̂ⁿ` together with a magnitude scale.
    pub fn printed_divergence_defect(&self) -> (Complex64, f64) {
        let a = self.xi_dot_phi();
        let b = self.omega * self.phi_n_hat;
        (a - b, a.norm() + b.norm())
    }

    /// `iξ′·φ̂′ − ωφ̂ⁿ + z p̂₀/ω`, the trace relation implied by `div v = 0`.
    pub fn divergence_closure_defect(&self) -> (Complex64, f64) {
        let a = self.xi_dot_phi();
        let b = self.omega * self.phi_n_hat;
        let c = self.z() * self.p0_hat / self.omega;
        (a - b + c, a.norm() + b.norm() + c.norm())
    }

    /// `λη̂ − φ̂ⁿ` together with a magnitude scale.
    pub fn kinematic_defect(&self) -> (Complex64, f64) {
        let a = self.lambda * self.eta_hat;
        (a - self.phi_n_hat, a.norm() + self.phi_n_hat.norm())
    }
}

/// `ξ′ = z·e₁` in `n − 1` tangential directions.
pub fn default_wave_vector(z: f64, n: usize) -> Vec<f64> {
    let mut xi = vec![0.0; n.max(2) - 1];
    xi[0] = z;
    xi
}

pub fn solve_traces(
    params: &PlateParams,
    f: Freq,
    xi: Option<&[f64]>,
    f_eta_hat: Complex64,
    coupling: Coupling,
) -> Result<TraceSolution, ResolventError> {
    let xi: Vec<f64> = match xi {
        Some(x) => x.to_vec(),
        None => default_wave_vector(f.z, 2),
    };
    let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - f.z).abs() > 1e-12 * f.z.max(1.0) {
        return Err(ResolventError::WaveVectorMismatch { norm, z: f.z });
    }
    let om = eval_omega(f).value;
    let z = f.z;
    let lambda = f.lambda;
    let zero = Complex64::zero();
    let (eta_hat, p0_hat) = if f_eta_hat.is_zero() {
        (zero, zero)
    } else {
        let n = check_resonance(params, f, coupling)?;
        match coupling {
            Coupling::Exact => (-z * f_eta_hat / n, -lambda * om * (om + z) * f_eta_hat / n),
            Coupling::AsPrinted => (
                -(z * z) * f_eta_hat / n,
                lambda * om * om * (om + z) * f_eta_hat / n,
            ),
        }
    };
    let denom = om * (om + z);
    let phi_prime_hat = xi.iter().map(|x| I * *x * p0_hat / denom).collect();
    Ok(TraceSolution {
        eta_hat,
        p0_hat,
        phi_prime_hat,
        phi_n_hat: lambda * eta_hat,
        omega: om,
        xi,
        lambda,
        coupling,
        degenerate: z == 0.0,
    })
}

/// `(eʷ − 1)/w`, accurate near `w = 0`.
fn phi1(w: Complex64) -> Complex64 {
    if w.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..30 {
            term = term * w / k as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (w.exp() - 1.0) / w
    }
}

/// `c_D·D(x) + c_z·e^{−zx} + c_ω·e^{−ωx}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ExpCombo {
    pub cd: Complex64,
    pub cz: Complex64,
    pub cw: Complex64,
}

/// `e^{−zx}`, `e^{−ωx}`, `D(x)` at one point.
#[derive(Clone, Copy, Debug)]
struct Basis {
    ez: Complex64,
    ew: Complex64,
    d: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldProfile {
    pub lambda: Complex64,
    pub omega: Complex64,
    pub z: f64,
    pub xi: Vec<f64>,
    /// tangential components followed by the normal one
    pub velocity: Vec<ExpCombo>,
    pub pressure: ExpCombo,
    /// `|ω − z| < 1e−8|ω|`; `D` is then evaluated from its series
    pub confluent: bool,
}

/// Threshold on `|ω − z|/|ω|` below which the profile is flagged confluent.
pub const CONFLUENT_EPS: f64 = 1e-8;

impl FieldProfile {
    fn basis(&self, x: f64) -> Basis {
        let z = Complex64::new(self.z, 0.0);
        let ez = (-z * x).exp();
        let ew = (-self.omega * x).exp();
        let w = -(self.omega - z) * x;
        let d = if w.norm() < 0.5 {
            x * ez * phi1(w)
        } else {
            (ez - ew) / (self.omega - z)
        };
        Basis { ez, ew, d }
    }

    /// Value and first two derivatives of one combination.
    fn eval_combo(&self, c: &ExpCombo, b: &Basis) -> [Complex64; 3] {
        let z = self.z;
        let om = self.omega;
        let d1 = b.ew - z * b.d;
        let d2 = -(om + z) * b.ew + z * z * b.d;
        [
            c.cd * b.d + c.cz * b.ez + c.cw * b.ew,
            c.cd * d1 - c.cz * z * b.ez - c.cw * om * b.ew,
            c.cd * d2 + c.cz * z * z * b.ez + c.cw * om * om * b.ew,
        ]
    }

    /// Sum of the moduli of the terms of one combination and of its
    /// derivatives.
    fn magnitude(&self, c: &ExpCombo, b: &Basis) -> [f64; 3] {
        let z = self.z;
        let om = self.omega;
        let d1 = (b.ew.norm() + z * b.d.norm()) * c.cd.norm();
        let d2 = ((om + z).norm() * b.ew.norm() + z * z * b.d.norm()) * c.cd.norm();
        [
            (c.cd * b.d).norm() + (c.cz * b.ez).norm() + (c.cw * b.ew).norm(),
            d1 + z * (c.cz * b.ez).norm() + (c.cw * om * b.ew).norm(),
            d2 + z * z * (c.cz * b.ez).norm() + (c.cw * om * om * b.ew).norm(),
        ]
    }

    /// Velocity components at `x`.
    pub fn velocity_at(&self, x: f64) -> Vec<Complex64> {
        let b = self.basis(x);
        self.velocity.iter().map(|c| self.eval_combo(c, &b)[0]).collect()
    }

    /// Velocity components with their first and second `xₙ` derivatives.
    pub fn velocity_jet(&self, x: f64) -> Vec<[Complex64; 3]> {
        let b = self.basis(x);
        self.velocity.iter().map(|c| self.eval_combo(c, &b)).collect()
    }

    pub fn pressure_at(&self, x: f64) -> Complex64 {
        let b = self.basis(x);
        self.eval_combo(&self.pressure, &b)[0]
    }

    pub fn pressure_jet(&self, x: f64) -> [Complex64; 3] {
        let b = self.basis(x);
        self.eval_combo(&self.pressure, &b)
    }
}

pub fn build_field_profile(traces: &TraceSolution) -> Result<FieldProfile, ResolventError> {
    let om = traces.omega;
    if !(om.re > 0.0) && !(traces.p0_hat.is_zero() && traces.phi_n_hat.is_zero()) {
        return Err(ResolventError::NonDecaying(om.re));
    }
    let z = traces.xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    let p0 = traces.p0_hat;
    let h = 1.0 / (2.0 * om);
    let hp = h / (om + z);
    let mut velocity: Vec<ExpCombo> = traces
        .xi
        .iter()
        .zip(&traces.phi_prime_hat)
        .map(|(x, phi)| {
            let a = -I * *x * p0;
            ExpCombo {
                cd: a * h,
                cz: a * hp,
                cw: a * hp + phi,
            }
        })
        .collect();
    let a = z * p0;
    velocity.push(ExpCombo {
        cd: a * h,
        cz: a * hp,
        cw: -a * hp + traces.phi_n_hat,
    });
    Ok(FieldProfile {
        lambda: traces.lambda,
        omega: om,
        z,
        xi: traces.xi.clone(),
        velocity,
        pressure: ExpCombo {
            cz: p0,
            ..Default::default()
        },
        confluent: (om - z).norm() < CONFLUENT_EPS * om.norm(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub residual: f64,
    pub scale: f64,
}

impl ResidualEntry {
    fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else if self.residual == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub momentum: ResidualEntry,
    pub divergence: ResidualEntry,
    pub tangential_trace: ResidualEntry,
    pub kinematic: ResidualEntry,
    pub normal_derivative: ResidualEntry,
    pub plate: ResidualEntry,
    /// largest relative residual
    pub residual_max: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn entries(&self) -> [(&'static str, ResidualEntry); 6] {
        [
            ("momentum", self.momentum),
            ("divergence", self.divergence),
            ("tangential_trace", self.tangential_trace),
            ("kinematic", self.kinematic),
            ("normal_derivative", self.normal_derivative),
            ("plate", self.plate),
        ]
    }
}

/// Default relative tolerance of [`residual_check`].
pub const RESIDUAL_TOL: f64 = 1e-8;

/// 64 log-spaced points on `[1e−3, 10]`.
pub fn residual_grid() -> Vec<f64> {
    (0..64).map(|k| 10f64.powf(-3.0 + 4.0 * k as f64 / 63.0)).collect()
}

fn sup(entry: &mut ResidualEntry, r: f64, s: f64) {
    entry.residual = entry.residual.max(r);
    entry.scale = entry.scale.max(s);
}

/// Evaluates every equation of the resolvent system on the profile, with
/// derivatives in closed form.
pub fn residual_check(
    params: &PlateParams,
    profile: &FieldProfile,
    eta_hat: Complex64,
    f_eta_hat: Complex64,
    tol: f64,
) -> ResidualReport {
    let om2 = profile.omega * profile.omega;
    let nt = profile.xi.len();
    let zero = ResidualEntry { residual: 0.0, scale: 0.0 };
    let (mut mom, mut div) = (zero, zero);
    for x in residual_grid() {
        let b = profile.basis(x);
        let p = profile.eval_combo(&profile.pressure, &b);
        let pm = profile.magnitude(&profile.pressure, &b);
        let mut dsum = Complex64::zero();
        let mut dscale = 0.0;
        for (j, c) in profile.velocity.iter().enumerate() {
            let v = profile.eval_combo(c, &b);
            let vm = profile.magnitude(c, &b);
            let (grad_p, grad_pm) = if j < nt {
                (I * profile.xi[j] * p[0], profile.xi[j].abs() * pm[0])
            } else {
                (p[1], pm[1])
            };
            let r = om2 * v[0] - v[2] + grad_p;
            sup(&mut mom, r.norm(), om2.norm() * vm[0] + vm[2] + grad_pm);
            if j < nt {
                dsum += I * profile.xi[j] * v[0];
                dscale += profile.xi[j].abs() * vm[0];
            } else {
                dsum += v[1];
                dscale += vm[1];
            }
        }
        sup(&mut div, dsum.norm(), dscale);
    }
    let b0 = profile.basis(0.0);
    let mut tan = zero;
    for c in &profile.velocity[..nt] {
        sup(&mut tan, profile.eval_combo(c, &b0)[0].norm(), profile.magnitude(c, &b0)[0]);
    }
    let vn = &profile.velocity[nt];
    let vn0 = profile.eval_combo(vn, &b0);
    let vnm = profile.magnitude(vn, &b0);
    let lam_eta = profile.lambda * eta_hat;
    let kin = ResidualEntry {
        residual: (lam_eta - vn0[0]).norm(),
        scale: lam_eta.norm() + vnm[0],
    };
    let dn = ResidualEntry {
        residual: vn0[1].norm(),
        scale: vnm[1],
    };
    let m = eval_m(
        params,
        Freq {
            lambda: profile.lambda,
            z: profile.z,
        },
    );
    let p0 = profile.pressure.cz;
    let plate = ResidualEntry {
        residual: (p0 - m * eta_hat - f_eta_hat).norm(),
        scale: p0.norm() + (m * eta_hat).norm() + f_eta_hat.norm(),
    };
    let mut report = ResidualReport {
        momentum: mom,
        divergence: div,
        tangential_trace: tan,
        kinematic: kin,
        normal_derivative: dn,
        plate,
        residual_max: 0.0,
        tol,
        pass: false,
    };
    report.residual_max = report
        .entries()
        .iter()
        .map(|(_, e)| e.relative())
        .fold(0.0, f64::max);
    report.pass = report.entries().iter().all(|(_, e)| e.residual <= tol * e.scale);
    report
}

/// Zero data must give the zero solution.
pub fn uniqueness_probe(params: &PlateParams, f: Freq, coupling: Coupling) -> bool {
    let Ok(t) = solve_traces(params, f, None, Complex64::zero(), coupling) else {
        return false;
    };
    let traces_zero = t.eta_hat.is_zero()
        && t.p0_hat.is_zero()
        && t.phi_n_hat.is_zero()
        && t.phi_prime_hat.iter().all(|x| x.is_zero());
    let Ok(profile) = build_field_profile(&t) else {
        return false;
    };
    traces_zero
        && [0.0, 0.1, 1.0, 10.0].iter().all(|&x| {
            profile.velocity_at(x).iter().all(|v| v.is_zero()) && profile.pressure_at(x).is_zero()
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit() -> PlateParams {
        PlateParams::new(1.0, 0.0, 1.0).unwrap()
    }

    fn fr(l: Complex64, z: f64) -> Freq {
        Freq::new(l, z).unwrap()
    }

    #[test]
    fn printed_eta_examples() {
        let p = unit();
        let e = solve_eta(&p, fr(c(1.0, 0.0), 1.0), c(1.0, 0.0), Coupling::AsPrinted).unwrap();
        assert!((e - c(-1.0 / (5.0 + 2.0 * 2f64.sqrt()), 0.0)).norm() < 1e-15);
        assert_eq!(solve_eta(&p, fr(c(1.0, 0.0), 1.0), c(0.0, 0.0), Coupling::AsPrinted).unwrap(), c(0.0, 0.0));
        assert_eq!(solve_eta(&p, fr(c(2.0, 1.0), 0.0), c(1.0, 0.0), Coupling::AsPrinted).unwrap().norm(), 0.0);
    }

    #[test]
    fn exact_eta_at_unit_frequency() {
        // N_E(1,1) = 3 − √2(√2+1) = 1 − √2
        let e = solve_eta(&unit(), fr(c(1.0, 0.0), 1.0), c(1.0, 0.0), Coupling::Exact).unwrap();
        assert!((e - c(-1.0 / (1.0 - 2f64.sqrt()), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_frequency_limit() {
        for coupling in [Coupling::Exact, Coupling::AsPrinted] {
            let t = solve_traces(&unit(), fr(c(1.0, 0.0), 0.0), None, c(1.0, 0.0), coupling).unwrap();
            assert_eq!(t.eta_hat.norm(), 0.0);
            assert_eq!(t.phi_n_hat.norm(), 0.0);
            assert!((t.p0_hat - c(1.0, 0.0)).norm() < 1e-15, "{coupling:?} {:?}", t.p0_hat);
            assert!(t.degenerate);
        }
    }

    #[test]
    fn zero_data_gives_zero_traces() {
        let t = solve_traces(&unit(), fr(c(1.0, 1.0), 2.0), None, c(0.0, 0.0), Coupling::Exact).unwrap();
        assert!(t.eta_hat.is_zero() && t.p0_hat.is_zero() && t.phi_n_hat.is_zero());
        assert!(uniqueness_probe(&unit(), fr(c(1.0, 1.0), 2.0), Coupling::Exact));
        assert!(uniqueness_probe(&unit(), fr(c(1.0, 1.0), 0.0), Coupling::AsPrinted));
    }

    #[test]
    fn printed_relations_hold_for_printed_coupling() {
        let t = solve_traces(&unit(), fr(c(0.7, 0.4), 1.3), None, c(1.0, -0.5), Coupling::AsPrinted).unwrap();
        let (d, s) = t.printed_divergence_defect();
        assert!(d.norm() <= 1e-12 * s);
        // −z²/(ω+z)·p̂₀ = λω²η̂
        let om = t.omega;
        let lhs = -(1.3f64 * 1.3) / (om + 1.3) * t.p0_hat;
        let rhs = t.lambda * om * om * t.eta_hat;
        assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
    }

    #[test]
    fn printed_coupling_leaves_divergence() {
        let p = unit();
        let t = solve_traces(&p, fr(c(1.0, 0.0), 1.0), None, c(1.0, 0.0), Coupling::AsPrinted).unwrap();
        let prof = build_field_profile(&t).unwrap();
        let rep = residual_check(&p, &prof, t.eta_hat, c(1.0, 0.0), RESIDUAL_TOL);
        assert!(!rep.pass);
        // ∂ₙv̂ⁿ(0) = z p̂₀/ω
        let dn = prof.velocity_jet(0.0)[1][1];
        assert!((dn - t.p0_hat / t.omega).norm() < 1e-14);
    }

    #[test]
    fn profile_reproduces_traces() {
        let t = solve_traces(&unit(), fr(c(0.3, 2.0), 0.8), Some(&[0.48, 0.64]), c(1.0, 0.0), Coupling::Exact).unwrap();
        let prof = build_field_profile(&t).unwrap();
        let v0 = prof.velocity_at(0.0);
        assert!(v0[0].norm() < 1e-15 && v0[1].norm() < 1e-15);
        assert!((v0[2] - t.phi_n_hat).norm() < 1e-15);
        assert_eq!(prof.pressure_at(0.0), t.p0_hat);
    }

    #[test]
    fn corrupted_pressure_is_flagged() {
        let p = unit();
        let f = fr(c(1.0, 0.0), 1.0);
        let mut t = solve_traces(&p, f, None, c(1.0, 0.0), Coupling::Exact).unwrap();
        let good = residual_check(&p, &build_field_profile(&t).unwrap(), t.eta_hat, c(1.0, 0.0), RESIDUAL_TOL);
        assert!(good.pass, "{good:?}");
        t.p0_hat *= 1.01;
        let bad = residual_check(&p, &build_field_profile(&t).unwrap(), t.eta_hat, c(1.0, 0.0), RESIDUAL_TOL);
        assert!(!bad.pass);
        assert!(bad.plate.residual > RESIDUAL_TOL * bad.plate.scale);
    }

    #[test]
    fn confluent_branch_is_continuous() {
        // λ tiny makes ω ≈ z
        let p = unit();
        let mk = |l: f64| {
            let t = solve_traces(&p, fr(c(l, 0.0), 1.0), None, c(1.0, 0.0), Coupling::Exact).unwrap();
            build_field_profile(&t).unwrap()
        };
        let a = mk(1e-9);
        assert!(a.confluent);
        let b = mk(1e-6);
        assert!(!b.confluent);
        for x in [0.0, 0.5, 3.0] {
            let (va, vb) = (a.basis(x).d, b.basis(x).d);
            assert!((va - vb).norm() < 1e-5 * vb.norm().max(1e-300));
            // D → x e^{−zx}
            assert!((va - x * (-x).exp()).norm() < 1e-8);
        }
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = unit();
        for _ in 0..100 {
            let l = c(rng.random_range(0.0..5.0), rng.random_range(-5.0..5.0));
            let z = rng.random_range(0.1..3.0);
            let t = solve_traces(&p, fr(l, z), None, c(1.0, 0.3), Coupling::Exact).unwrap();
            let prof = build_field_profile(&t).unwrap();
            let h = 1e-5;
            for x in [0.05, 0.4, 2.0] {
                let jet = prof.velocity_jet(x);
                let up = prof.velocity_at(x + h);
                let dn = prof.velocity_at(x - h);
                for k in 0..jet.len() {
                    let d1 = (up[k] - dn[k]) / (2.0 * h);
                    let d2 = (up[k] - 2.0 * jet[k][0] + dn[k]) / (h * h);
                    let s = jet[k][0].norm() + jet[k][1].norm() + jet[k][2].norm();
                    assert!((d1 - jet[k][1]).norm() <= 1e-7 * s);
                    assert!((d2 - jet[k][2]).norm() <= 1e-3 * s);
                }
            }
        }
    }

    #[test]
    fn random_samples_pass_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = unit();
        for _ in 0..100 {
            let l = c(rng.random_range(0.0..10.0), rng.random_range(-10.0..10.0));
            let z = rng.random_range(0.05..5.0);
            let fh = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let t = solve_traces(&p, fr(l, z), None, fh, Coupling::Exact).unwrap();
            let (d, s) = t.divergence_closure_defect();
            assert!(d.norm() <= 1e-12 * s);
            let (k, s) = t.kinematic_defect();
            assert!(k.norm() <= 1e-12 * s.max(1e-300));
            let rep = residual_check(&p, &build_field_profile(&t).unwrap(), t.eta_hat, fh, RESIDUAL_TOL);
            assert!(rep.pass, "{l} {z} {rep:?}");
        }
    }

    #[test]
    fn linearity() {
        let p = unit();
        let f = fr(c(0.5, 1.5), 0.9);
        let k = c(2.0, -3.0);
        let a = solve_traces(&p, f, None, c(1.0, 0.0), Coupling::Exact).unwrap();
        let b = solve_traces(&p, f, None, k, Coupling::Exact).unwrap();
        assert!((b.eta_hat - k * a.eta_hat).norm() < 1e-14 * b.eta_hat.norm());
        assert!((b.p0_hat - k * a.p0_hat).norm() < 1e-14 * b.p0_hat.norm());
    }

    #[test]
    fn resonance_is_reported() {
        // real positive root of N_E for (1,0,1) at z = 1
        let p = unit();
        let mut lo = 0.5;
        let mut hi = 1.0;
        let ne = |l: f64| eval_ne(&p, fr(c(l, 0.0), 1.0)).value.re;
        assert!(ne(lo) * ne(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ne(lo) * ne(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let r = solve_eta(&p, fr(c(lo, 0.0), 1.0), c(1.0, 0.0), Coupling::Exact);
        assert!(matches!(r, Err(ResolventError::NearResonance { .. })));
    }

    #[test]
    fn decays_away_from_boundary() {
        let p = unit();
        let t = solve_traces(&p, fr(c(1.0, 1.0), 1.5), None, c(1.0, 0.0), Coupling::Exact).unwrap();
        let prof = build_field_profile(&t).unwrap();
        let rate = prof.omega.re.min(prof.z) / 2.0;
        let c1: f64 = prof.velocity_at(1.0).iter().map(|v| v.norm()).sum::<f64>() * rate.exp();
        for x in [2.0, 5.0, 10.0, 20.0] {
            let s: f64 = prof.velocity_at(x).iter().map(|v| v.norm()).sum();
            assert!(s <= 2.0 * c1 * (-rate * x).exp());
        }
    }
}
