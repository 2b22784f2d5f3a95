//! Discrete compatibility conditions between initial data and right-hand
//! sides.
//!
//! * C1: `div v₀ − ∇′η₀·∂ₙv₀′ − g(0) = 0`, tested weakly against a fixed family
//!   of 32 test functions.
//! * C2: `v₀′ = 0` and C3: `v₀ⁿ − η₁ = 0` on the boundary, pointwise, required
//!   only for `p > 3/2`.
//! * C4: `∫gφ + ∫η₁φ(·,0) = −∫v₀·∇φ` for the same family.
//!
//! The test functions are products of periodic cubic B-splines in `x′` and
//! cubic Bernstein polynomials in `xₙ` on `[0, X]`. Integrals in `xₙ` use
//! Gauss–Legendre quadrature of the nodal interpolants, and tangential
//! derivatives of the test functions are the spectral derivatives of their
//! samples, so the discrete integration by parts is exact.

use super::data::ProblemData;
use super::grid::gauss_legendre;
use super::spectral::{d_normal, sup};
use super::Discretization;
use crate::polygon::Rational;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CompatStatus {
    Pass,
    Fail,
    NotRequired,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatItem {
    pub status: CompatStatus,
    /// Largest defect over test functions or boundary points.
    pub defect: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatReport {
    pub c1: CompatItem,
    pub c2: CompatItem,
    pub c3: CompatItem,
    pub c4: CompatItem,
    pub violations: Vec<String>,
}

impl CompatReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompatOptions {
    /// Absolute tolerance of the weak divergence condition, per unit `‖φ‖`.
    pub tol_weak: f64,
    /// Absolute tolerance of the boundary conditions.
    pub tol_pointwise: f64,
    /// Relative tolerance of the integration-by-parts identity.
    pub tol_ibp: f64,
    /// Include the `∇′η₀·∂ₙv₀′` correction of the flattened system.
    pub nonlinear: bool,
}

impl Default for CompatOptions {
    fn default() -> Self {
        CompatOptions { tol_weak: 1e-8, tol_pointwise: 1e-10, tol_ibp: 1e-10, nonlinear: true }
    }
}

fn cubic_bspline(u: f64) -> f64 {
    let a = u.abs();
    if a < 1.0 {
        2.0 / 3.0 - a * a + a * a * a / 2.0
    } else if a < 2.0 {
        (2.0 - a).powi(3) / 6.0
    } else {
        0.0
    }
}

fn periodic_bspline(x: f64, center: f64, h: f64, period: f64) -> f64 {
    (-3..=3).map(|m| cubic_bspline((x - center + m as f64 * period) / h)).sum()
}

fn bernstein(k: usize, s: f64) -> (f64, f64) {
    let binom = [1.0, 3.0, 3.0, 1.0][k];
    let ki = k as i32;
    let val = binom * s.powi(ki) * (1.0 - s).powi(3 - ki);
    let der = binom
        * (if k > 0 { ki as f64 * s.powi(ki - 1) * (1.0 - s).powi(3 - ki) } else { 0.0 }
            - if k < 3 { (3 - ki) as f64 * s.powi(ki) * (1.0 - s).powi(2 - ki) } else { 0.0 });
    (val, der)
}

/// One test function, sampled on the tangential grid and at the quadrature
/// heights.
struct TestFunction {
    tang: Vec<f64>,
    tang_grad: Vec<Vec<f64>>,
    normal: Vec<f64>,
    normal_der: Vec<f64>,
    at_zero: f64,
}

struct Quadrature {
    interp: nalgebra::DMatrix<f64>,
    weights: Vec<f64>,
    cell: f64,
    family: Vec<TestFunction>,
}

impl Quadrature {
    fn new(disc: &Discretization) -> Self {
        let g = disc.grid();
        let q = g.levels + 4;
        let (nodes, weights) = gauss_legendre(q, 0.0, g.height);
        let interp = disc.mesh.interpolation_matrix(&nodes);
        let cell = (g.period / g.modes as f64).powi(g.n as i32 - 1);
        let splits: Vec<usize> = if g.n == 2 { vec![8] } else { vec![2, 4] };
        let mut family = Vec::with_capacity(32);
        let combos: Vec<Vec<usize>> = if g.n == 2 {
            (0..8).map(|a| vec![a]).collect()
        } else {
            (0..2).flat_map(|a| (0..4).map(move |b| vec![a, b])).collect()
        };
        for idx in &combos {
            let tang: Vec<f64> = (0..g.tangential_len())
                .map(|t| {
                    let x = g.tangential_point(t);
                    idx.iter()
                        .zip(&splits)
                        .enumerate()
                        .map(|(d, (&i, &ns))| {
                            let h = g.period / ns as f64;
                            periodic_bspline(x[d], i as f64 * h, h, g.period)
                        })
                        .product()
                })
                .collect();
            let tang_grad: Vec<Vec<f64>> = (0..g.n - 1).map(|d| disc.spectral.d_tangential(&tang, d)).collect();
            for k in 0..4 {
                let (normal, normal_der): (Vec<f64>, Vec<f64>) = nodes
                    .iter()
                    .map(|&y| {
                        let (b, db) = bernstein(k, y / g.height);
                        (b, db / g.height)
                    })
                    .unzip();
                family.push(TestFunction {
                    tang: tang.clone(),
                    tang_grad: tang_grad.clone(),
                    normal,
                    normal_der,
                    at_zero: bernstein(k, 0.0).0,
                });
            }
        }
        Quadrature { interp, weights, cell, family }
    }

    /// `Σ_q W_q ψ(y_q) Σ_t a_q(t) χ(t)` with `a_q` the interpolant of `field`.
    fn integrate(&self, disc: &Discretization, field: &[f64], normal: &[f64], tang: &[f64]) -> f64 {
        let (m, p) = (disc.mesh.levels(), disc.mesh.tangential_len());
        let mut total = 0.0;
        for (qi, (w, psi)) in self.weights.iter().zip(normal).enumerate() {
            if *psi == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for j in 0..m {
                let e = self.interp[(qi, j)];
                if e == 0.0 {
                    continue;
                }
                let lvl = &field[j * p..(j + 1) * p];
                s += e * lvl.iter().zip(tang).map(|(a, b)| a * b).sum::<f64>();
            }
            total += w * psi * s;
        }
        total * self.cell
    }

    fn boundary(&self, f: &[f64], phi: &TestFunction) -> f64 {
        phi.at_zero * f.iter().zip(&phi.tang).map(|(a, b)| a * b).sum::<f64>() * self.cell
    }

    fn norm(&self, phi: &TestFunction) -> f64 {
        let t: f64 = phi.tang.iter().map(|x| x * x).sum();
        let nn: f64 = self.weights.iter().zip(&phi.normal).map(|(w, b)| w * b * b).sum();
        (t * nn * self.cell).sqrt()
    }
}

fn abs_phi(phi: &TestFunction) -> TestFunction {
    TestFunction {
        tang: phi.tang.iter().map(|x| x.abs()).collect(),
        tang_grad: Vec::new(),
        normal: Vec::new(),
        normal_der: Vec::new(),
        at_zero: phi.at_zero.abs(),
    }
}

fn item(defect: f64, tol: f64) -> CompatItem {
    let status = if defect <= tol { CompatStatus::Pass } else { CompatStatus::Fail };
    CompatItem { status, defect, tol }
}

/// Itemized check of C1–C4 for the initial data of `data`.
pub fn check_compatibility(disc: &Discretization, data: &ProblemData, opts: &CompatOptions) -> CompatReport {
    let g = disc.grid();
    let (n, p) = (g.n, g.tangential_len());
    let mut violations = Vec::new();
    if let Err(e) = data.validate() {
        violations.push(e.to_string());
        let bad = CompatItem { status: CompatStatus::Fail, defect: f64::INFINITY, tol: 0.0 };
        return CompatReport { c1: bad.clone(), c2: bad.clone(), c3: bad.clone(), c4: bad, violations };
    }
    let quad = Quadrature::new(disc);
    let v0 = &data.v0;

    // The divergence datum seen by C1 and C4, including the flattening term.
    let mut g0 = data.g_at(0.0);
    if opts.nonlinear {
        for d in 0..n - 1 {
            let ge = disc.spectral.d_tangential(&data.eta0, d);
            let dn = d_normal(&disc.mesh, &v0[d]);
            for (i, gi) in g0.iter_mut().enumerate() {
                *gi += ge[i % p] * dn[i];
            }
        }
    }
    let mut div = d_normal(&disc.mesh, &v0[n - 1]);
    for d in 0..n - 1 {
        for (a, b) in div.iter_mut().zip(disc.spectral.d_tangential(&v0[d], d)) {
            *a += b;
        }
    }
    let defect_field: Vec<f64> = div.iter().zip(&g0).map(|(a, b)| a - b).collect();

    let mut c1: f64 = 0.0;
    let mut c4: f64 = 0.0;
    for (i, phi) in quad.family.iter().enumerate() {
        let weak = quad.integrate(disc, &defect_field, &phi.normal, &phi.tang).abs() / quad.norm(phi);
        c1 = c1.max(weak);
        let lhs_g = quad.integrate(disc, &g0, &phi.normal, &phi.tang);
        let lhs_b = quad.boundary(&data.eta1, phi);
        let mut rhs = -quad.integrate(disc, &v0[n - 1], &phi.normal_der, &phi.tang);
        for d in 0..n - 1 {
            rhs -= quad.integrate(disc, &v0[d], &phi.normal, &phi.tang_grad[d]);
        }
        // magnitude of the integrands, so that vanishing sides compare
        // against the data rather than against each other
        let abs = |f: &[f64]| f.iter().map(|x| x.abs()).collect::<Vec<_>>();
        let mut mag = quad.integrate(disc, &abs(&g0), &abs(&phi.normal), &abs(&phi.tang))
            + quad.boundary(&abs(&data.eta1), &abs_phi(phi))
            + quad.integrate(disc, &abs(&v0[n - 1]), &abs(&phi.normal_der), &abs(&phi.tang));
        for d in 0..n - 1 {
            mag += quad.integrate(disc, &abs(&v0[d]), &abs(&phi.normal), &abs(&phi.tang_grad[d]));
        }
        let scale = lhs_g.abs() + lhs_b.abs() + rhs.abs() + mag;
        let rel = if scale > 0.0 { (lhs_g + lhs_b - rhs).abs() / scale } else { 0.0 };
        c4 = c4.max(rel);
        if rel > opts.tol_ibp {
            violations.push(format!("C4: test function {i} has relative defect {rel:e}"));
        }
    }
    let c1 = item(c1, opts.tol_weak);
    if c1.status == CompatStatus::Fail {
        violations.insert(0, format!("C1: weak divergence defect {:e}", c1.defect));
    }
    let c4 = item(c4, opts.tol_ibp);

    let required = data.p_exponent > Rational::new(3, 2);
    let (c2, c3) = if required {
        let c2 = item(
            (0..n - 1).map(|d| sup(&v0[d][..p])).fold(0.0, f64::max),
            opts.tol_pointwise,
        );
        let jump: Vec<f64> = v0[n - 1][..p].iter().zip(&data.eta1).map(|(a, b)| a - b).collect();
        let c3 = item(sup(&jump), opts.tol_pointwise);
        if c2.status == CompatStatus::Fail {
            violations.push(format!("C2: tangential boundary velocity {:e}", c2.defect));
        }
        if c3.status == CompatStatus::Fail {
            violations.push(format!("C3: normal boundary velocity minus plate velocity {:e}", c3.defect));
        }
        (c2, c3)
    } else {
        let skip = CompatItem { status: CompatStatus::NotRequired, defect: 0.0, tol: opts.tol_pointwise };
        (skip.clone(), skip)
    };
    CompatReport { c1, c2, c3, c4, violations }
}
