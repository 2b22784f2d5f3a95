//! Newton polygons of symbols in `(λ, z)` with an extra factor `ω = √(λ+z²)`.
//!
//! A term `c·λ^a z^b ω^k` contributes the points `(b, a + k/2)` and
//! `(b + k, a)` in `(b, a)` coordinates, since `ω` behaves like `λ^{1/2}` when
//! `λ` dominates and like `z` otherwise. Under the scaling `λ ~ z^r` a point
//! has quasi-degree `r·a + b`.

use crate::exec::Execution;
use crate::symbol::{half_power, principal_sqrt, sector_angle_phi0, roots_m, PlateParams};
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

pub type Rational = Rational64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolygonError {
    #[error("empty term set")]
    EmptyTermSet,
    #[error("invalid term: {0}")]
    InvalidTerm(&'static str),
    #[error("invalid sector or sampling: {0}")]
    InvalidSampling(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedTerm {
    pub coeff: Complex64,
    /// exponent of λ
    pub a: Rational,
    /// exponent of z
    pub b: Rational,
    /// exponent of ω
    pub c: u32,
}

impl MixedTerm {
    pub fn new(coeff: Complex64, a: Rational, b: Rational, c: u32) -> Result<Self, PolygonError> {
        if a.is_negative() || b.is_negative() {
            return Err(PolygonError::InvalidTerm("negative exponent"));
        }
        if coeff.norm() == 0.0 || !coeff.re.is_finite() || !coeff.im.is_finite() {
            return Err(PolygonError::InvalidTerm("zero or non-finite coefficient"));
        }
        Ok(MixedTerm { coeff, a, b, c })
    }

    fn int(coeff: f64, a: i64, b: i64, c: u32) -> Self {
        MixedTerm {
            coeff: Complex64::new(coeff, 0.0),
            a: Rational::from_integer(a),
            b: Rational::from_integer(b),
            c,
        }
    }
}

/// A point `(b, a)`: exponent of z first, exponent of λ second.
pub type Point = (Rational, Rational);

pub fn term_points(t: &MixedTerm) -> Vec<Point> {
    if t.c == 0 {
        return vec![(t.b, t.a)];
    }
    let c = Rational::from_integer(t.c as i64);
    vec![(t.b, t.a + c / 2), (t.b + c, t.a)]
}

/// Terms of `N_L = z²m + λω²(ω+z)`; the `βz⁴` term is dropped when `β = 0`.
pub fn nl_terms(params: &PlateParams) -> Vec<MixedTerm> {
    let mut v = vec![
        MixedTerm::int(1.0, 2, 2, 0),
        MixedTerm::int(params.alpha, 0, 6, 0),
        MixedTerm::int(params.gamma, 1, 4, 0),
        MixedTerm::int(1.0, 1, 0, 3),
        MixedTerm::int(1.0, 1, 1, 2),
    ];
    if params.beta != 0.0 {
        v.push(MixedTerm::int(params.beta, 0, 4, 0));
    }
    v
}

/// Terms of the plate symbol `m`.
pub fn m_terms(params: &PlateParams) -> Vec<MixedTerm> {
    let mut v = vec![
        MixedTerm::int(1.0, 2, 0, 0),
        MixedTerm::int(params.alpha, 0, 4, 0),
        MixedTerm::int(params.gamma, 1, 2, 0),
    ];
    if params.beta != 0.0 {
        v.push(MixedTerm::int(params.beta, 0, 2, 0));
    }
    v
}

/// Scaling weight `r` in `λ ~ z^r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Weight {
    Finite(Rational),
    Infinite,
}

impl Weight {
    pub fn to_f64(self) -> f64 {
        match self {
            Weight::Finite(r) => r.to_f64().unwrap_or(f64::NAN),
            Weight::Infinite => f64::INFINITY,
        }
    }

    pub fn label(self) -> String {
        match self {
            Weight::Finite(r) => r.to_string(),
            Weight::Infinite => "inf".to_string(),
        }
    }
}

impl Serialize for Weight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: Point,
    pub to: Point,
    pub r: Weight,
    /// Non-vertex points lying on the edge.
    pub on_edge: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonPolygon {
    pub points: Vec<Point>,
    /// Upper-right chain from the largest `b` to the largest `a`.
    pub vertices: Vec<Point>,
    pub edges: Vec<Edge>,
}

fn all_points(terms: &[MixedTerm]) -> Vec<Point> {
    let mut pts: Vec<Point> = terms.iter().flat_map(term_points).collect();
    pts.sort();
    pts.dedup();
    pts
}

pub fn build_polygon(terms: &[MixedTerm]) -> Result<NewtonPolygon, PolygonError> {
    if terms.is_empty() {
        return Err(PolygonError::EmptyTermSet);
    }
    let points = all_points(terms);
    let start = *points
        .iter()
        .max_by(|p, q| p.0.cmp(&q.0).then(p.1.cmp(&q.1)))
        .expect("nonempty");
    let mut vertices = vec![start];
    let mut edges = Vec::new();
    let mut cur = start;
    loop {
        // next vertex: smallest weight (b0 - b)/(a - a0) among points above
        let mut best: Option<(Rational, Vec<Point>)> = None;
        for &q in points.iter().filter(|q| q.1 > cur.1) {
            let r = (cur.0 - q.0) / (q.1 - cur.1);
            match &mut best {
                Some((br, set)) if r == *br => set.push(q),
                Some((br, _)) if r > *br => {}
                _ => best = Some((r, vec![q])),
            }
        }
        let Some((r, mut set)) = best else { break };
        set.sort_by(|p, q| p.1.cmp(&q.1));
        let next = *set.last().expect("nonempty");
        set.pop();
        edges.push(Edge {
            from: cur,
            to: next,
            r: Weight::Finite(r),
            on_edge: set,
        });
        vertices.push(next);
        cur = next;
    }
    Ok(NewtonPolygon {
        points,
        vertices,
        edges,
    })
}

/// How `ω` is replaced inside a principal symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OmegaRule {
    Z,
    Full,
    SqrtLambda,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalSymbol {
    pub r: Weight,
    pub terms: Vec<MixedTerm>,
    pub omega: OmegaRule,
}

fn rational_power(x: Complex64, e: Rational) -> Complex64 {
    if e.is_zero() {
        return Complex64::one();
    }
    let twice = e * 2;
    if twice.is_integer() {
        half_power(x, twice.to_integer() as u32)
    } else if x.norm() == 0.0 {
        Complex64::zero()
    } else {
        x.powf(e.to_f64().unwrap())
    }
}

impl PrincipalSymbol {
    fn omega_value(&self, lambda: Complex64, z: Complex64) -> Complex64 {
        match self.omega {
            OmegaRule::Z => z,
            OmegaRule::SqrtLambda => principal_sqrt(lambda),
            OmegaRule::Full => principal_sqrt(lambda + z * z),
        }
    }

    fn term_value(&self, t: &MixedTerm, lambda: Complex64, z: Complex64, om: Complex64) -> Complex64 {
        t.coeff * rational_power(lambda, t.a) * rational_power(z, t.b) * om.powu(t.c)
    }

    pub fn eval(&self, lambda: Complex64, z: Complex64) -> Complex64 {
        let om = self.omega_value(lambda, z);
        self.terms
            .iter()
            .map(|t| self.term_value(t, lambda, z, om))
            .sum()
    }

    /// Value and the sum of the moduli of its terms.
    pub fn eval_with_scale(&self, lambda: Complex64, z: Complex64) -> (Complex64, f64) {
        let om = self.omega_value(lambda, z);
        let mut v = Complex64::zero();
        let mut s = 0.0;
        for t in &self.terms {
            let x = self.term_value(t, lambda, z, om);
            v += x;
            s += x.norm();
        }
        (v, s)
    }
}

/// Evaluates a full term set at `(λ, z)` with `ω = √(λ+z²)`.
pub fn eval_terms(terms: &[MixedTerm], lambda: Complex64, z: Complex64) -> Complex64 {
    PrincipalSymbol {
        r: Weight::Infinite,
        terms: terms.to_vec(),
        omega: OmegaRule::Full,
    }
    .eval(lambda, z)
}

/// Leading part of `terms` under `λ ~ z^r`.
pub fn principal_symbol(terms: &[MixedTerm], r: Weight) -> PrincipalSymbol {
    let two = Rational::from_integer(2);
    // key to maximise for each point
    let key = |p: &Point| -> (Rational, Rational) {
        match r {
            Weight::Finite(r) => (r * p.1 + p.0, Rational::zero()),
            Weight::Infinite => (p.1, p.0),
        }
    };
    let best = terms
        .iter()
        .flat_map(term_points)
        .map(|p| key(&p))
        .max()
        .unwrap_or_default();
    let selected = terms
        .iter()
        .filter(|t| term_points(t).iter().any(|p| key(p) == best))
        .copied()
        .collect();
    let omega = match r {
        Weight::Finite(x) if x < two => OmegaRule::Z,
        Weight::Finite(x) if x == two => OmegaRule::Full,
        _ => OmegaRule::SqrtLambda,
    };
    PrincipalSymbol {
        r,
        terms: selected,
        omega,
    }
}

/// A rational strictly between `lo` and `hi`, close to their geometric mean.
fn interior_weight(lo: Rational, hi: Rational) -> Rational {
    let g = (lo.to_f64().unwrap() * hi.to_f64().unwrap()).sqrt();
    let cand = Rational::new((g * 6.0).round() as i64, 6);
    if cand > lo && cand < hi {
        cand
    } else {
        (lo + hi) / 2
    }
}

/// Edge weights together with one representative inside each open interval
/// between them and one on either side.
pub fn representative_weights(poly: &NewtonPolygon) -> Vec<Weight> {
    let ws: Vec<Rational> = poly
        .edges
        .iter()
        .filter_map(|e| match e.r {
            Weight::Finite(r) => Some(r),
            Weight::Infinite => None,
        })
        .collect();
    if ws.is_empty() {
        return vec![Weight::Finite(Rational::one())];
    }
    let mut out = vec![Weight::Finite(ws[0] / 2)];
    for (i, &w) in ws.iter().enumerate() {
        out.push(Weight::Finite(w));
        if let Some(&next) = ws.get(i + 1) {
            out.push(Weight::Finite(interior_weight(w, next)));
        }
    }
    out.push(Weight::Finite(*ws.last().unwrap() * 2));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplingSpec {
    /// log-spaced moduli per variable
    pub moduli: usize,
    /// arguments per variable, midpoints of a uniform partition of the sector
    pub args: usize,
    pub min_modulus: f64,
    pub max_modulus: f64,
    /// minimal admissible `|P_r| / Σ|terms|`
    pub threshold: f64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec {
            moduli: 64,
            args: 33,
            min_modulus: 1e-3,
            max_modulus: 1e3,
            threshold: 1e-3,
        }
    }
}

impl SamplingSpec {
    pub fn samples_per_weight(&self) -> usize {
        self.moduli * self.moduli * self.args * self.args
    }

    fn moduli_grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.min_modulus.ln(), self.max_modulus.ln());
        (0..self.moduli)
            .map(|i| {
                if self.moduli == 1 {
                    lo.exp()
                } else {
                    (lo + (hi - lo) * i as f64 / (self.moduli - 1) as f64).exp()
                }
            })
            .collect()
    }

    fn arg_grid(&self, half_angle: f64) -> Vec<f64> {
        let k = self.args as f64;
        (0..self.args)
            .map(|i| -half_angle + half_angle * (2.0 * i as f64 + 1.0) / k)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightReport {
    pub r: Weight,
    pub r_value: f64,
    pub terms: usize,
    pub min_ratio: f64,
    pub argmin_lambda: (f64, f64),
    pub argmin_z: (f64, f64),
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootReport {
    /// smallest `|arg λ|` of a root of the principal plate symbol over `z ∈ Σ_θ`
    pub min_abs_arg: f64,
    /// required lower bound `π − φ`
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ParabolicityStatus {
    Pass,
    Fail,
    SectorTooWide,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParabolicityReport {
    pub phi0: f64,
    pub phi: f64,
    pub theta: f64,
    pub angles_ok: bool,
    pub weights: Vec<WeightReport>,
    pub roots: Option<RootReport>,
    pub samples: usize,
    pub status: ParabolicityStatus,
}

fn sample_weight(
    sym: &PrincipalSymbol,
    phi: f64,
    theta: f64,
    spec: &SamplingSpec,
    exec: Execution,
) -> WeightReport {
    let mods = spec.moduli_grid();
    let lam_args = spec.arg_grid(PI - phi);
    let z_args = spec.arg_grid(theta);
    // best (ratio, λ, z) per λ-modulus
    let rows = exec.map(&mods, |&rl| {
        let mut best = (f64::INFINITY, Complex64::zero(), Complex64::zero());
        for &al in &lam_args {
            let lambda = Complex64::from_polar(rl, al);
            for &rz in &mods {
                for &az in &z_args {
                    let z = Complex64::from_polar(rz, az);
                    let (v, s) = sym.eval_with_scale(lambda, z);
                    let ratio = if s > 0.0 { v.norm() / s } else { 0.0 };
                    if ratio < best.0 || ratio.is_nan() {
                        best = (ratio, lambda, z);
                    }
                }
            }
        }
        best
    });
    let best = rows
        .into_iter()
        .fold((f64::INFINITY, Complex64::zero(), Complex64::zero()), |a, b| {
            if b.0 < a.0 || b.0.is_nan() {
                b
            } else {
                a
            }
        });
    WeightReport {
        r: sym.r,
        r_value: sym.r.to_f64(),
        terms: sym.terms.len(),
        min_ratio: best.0,
        argmin_lambda: (best.1.re, best.1.im),
        argmin_z: (best.2.re, best.2.im),
        pass: best.0 > spec.threshold,
    }
}

fn root_report(params: &PlateParams, phi: f64, theta: f64) -> RootReport {
    let principal = PlateParams { beta: 0.0, ..*params };
    // roots of m₀(·, z) are z²·ρ with ρ the roots at z = 1
    let rho = roots_m(&principal, 1.0);
    let mut min_abs_arg = f64::INFINITY;
    for k in 0..=64 {
        let az = -theta + 2.0 * theta * k as f64 / 64.0;
        let z2 = Complex64::from_polar(1.0, 2.0 * az);
        for r in rho {
            min_abs_arg = min_abs_arg.min((z2 * r).arg().abs());
        }
    }
    let bound = PI - phi;
    RootReport {
        min_abs_arg,
        bound,
        pass: min_abs_arg >= bound,
    }
}

/// Samples every representative principal symbol on `Σ_{π−φ} × Σ_θ`.
///
/// With `params` the sector angles are also checked against `φ₀` and the
/// roots of the principal plate symbol are located exactly.
pub fn check_parabolicity(
    terms: &[MixedTerm],
    params: Option<&PlateParams>,
    phi: f64,
    theta: f64,
    spec: &SamplingSpec,
    exec: Execution,
) -> Result<ParabolicityReport, PolygonError> {
    if !(phi > 0.0 && phi < PI / 2.0) {
        return Err(PolygonError::InvalidSampling("phi must lie in (0, pi/2)"));
    }
    if !(theta > 0.0) {
        return Err(PolygonError::InvalidSampling("theta must be positive"));
    }
    if spec.moduli == 0 || spec.args == 0 || !(spec.min_modulus > 0.0 && spec.max_modulus >= spec.min_modulus) {
        return Err(PolygonError::InvalidSampling("empty sampling grid"));
    }
    let poly = build_polygon(terms)?;
    let phi0 = params.map(sector_angle_phi0).unwrap_or(0.0);
    if params.is_some() && phi <= phi0 {
        return Ok(ParabolicityReport {
            phi0,
            phi,
            theta,
            angles_ok: false,
            weights: vec![],
            roots: None,
            samples: 0,
            status: ParabolicityStatus::SectorTooWide,
        });
    }
    let angles_ok = match params {
        Some(_) => phi > phi0 && phi < PI / 2.0 && theta < (phi - phi0) / 4.0,
        None => true,
    };
    let ws = representative_weights(&poly);
    let weights: Vec<WeightReport> = ws
        .iter()
        .map(|&r| sample_weight(&principal_symbol(terms, r), phi, theta, spec, exec))
        .collect();
    let roots = params.map(|p| root_report(p, phi, theta));
    let ok = angles_ok && weights.iter().all(|w| w.pass) && roots.as_ref().is_none_or(|r| r.pass);
    Ok(ParabolicityReport {
        phi0,
        phi,
        theta,
        angles_ok,
        samples: weights.len() * spec.samples_per_weight(),
        weights,
        roots,
        status: if ok {
            ParabolicityStatus::Pass
        } else {
            ParabolicityStatus::Fail
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn pt(b: (i64, i64), a: (i64, i64)) -> Point {
        (q(b.0, b.1), q(a.0, a.1))
    }

    #[test]
    fn term_points_examples() {
        let t = MixedTerm::int(1.0, 1, 0, 3);
        assert_eq!(term_points(&t), vec![pt((0, 1), (5, 2)), pt((3, 1), (1, 1))]);
        let t = MixedTerm::int(1.0, 0, 6, 0);
        assert_eq!(term_points(&t), vec![pt((6, 1), (0, 1))]);
        let t = MixedTerm::int(1.0, 1, 1, 2);
        assert_eq!(term_points(&t), vec![pt((1, 1), (2, 1)), pt((3, 1), (1, 1))]);
    }

    #[test]
    fn nl_polygon_vertices_and_weights() {
        let poly = build_polygon(&nl_terms(&PlateParams::default())).unwrap();
        assert_eq!(
            poly.vertices,
            vec![pt((6, 1), (0, 1)), pt((2, 1), (2, 1)), pt((0, 1), (5, 2))]
        );
        let rs: Vec<Weight> = poly.edges.iter().map(|e| e.r).collect();
        assert_eq!(rs, vec![Weight::Finite(q(2, 1)), Weight::Finite(q(4, 1))]);
        assert_eq!(poly.edges[0].on_edge, vec![pt((4, 1), (1, 1))]);
    }

    #[test]
    fn single_term_polygon() {
        let poly = build_polygon(&[MixedTerm::int(1.0, 2, 0, 0)]).unwrap();
        assert_eq!(poly.vertices, vec![pt((0, 1), (2, 1))]);
        assert!(poly.edges.is_empty());
    }

    #[test]
    fn plate_polygon_has_damping_on_edge() {
        let poly = build_polygon(&m_terms(&PlateParams::new(1.0, 0.0, 1.0).unwrap())).unwrap();
        assert_eq!(poly.vertices, vec![pt((4, 1), (0, 1)), pt((0, 1), (2, 1))]);
        assert_eq!(poly.edges[0].on_edge, vec![pt((2, 1), (1, 1))]);
        assert_eq!(poly.edges[0].r, Weight::Finite(q(2, 1)));
    }

    #[test]
    fn empty_terms_rejected() {
        assert_eq!(build_polygon(&[]), Err(PolygonError::EmptyTermSet));
    }

    #[test]
    fn principal_symbols_of_nl() {
        let p = PlateParams::new(1.3, 0.0, 0.7).unwrap();
        let terms = nl_terms(&p);
        let l = Complex64::new(0.4, 1.1);
        let z = Complex64::new(2.3, 0.0);
        let p1 = principal_symbol(&terms, Weight::Finite(q(1, 1)));
        assert!((p1.eval(l, z) - 1.3 * z.powu(6)).norm() < 1e-12);
        let p2 = principal_symbol(&terms, Weight::Finite(q(2, 1)));
        let m0 = l * l + 1.3 * z.powu(4) + 0.7 * l * z * z;
        assert!((p2.eval(l, z) - m0 * z * z).norm() < 1e-10);
        let p4 = principal_symbol(&terms, Weight::Finite(q(4, 1)));
        let e = l * l * z * z + l * l * l.sqrt();
        assert!((p4.eval(l, z) - e).norm() < 1e-12);
        let pinf = principal_symbol(&terms, Weight::Infinite);
        assert!((pinf.eval(l, z) - l * l * l.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn representative_weights_of_nl() {
        let poly = build_polygon(&nl_terms(&PlateParams::default())).unwrap();
        let ws = representative_weights(&poly);
        let f = |n, d| Weight::Finite(q(n, d));
        assert_eq!(ws, vec![f(1, 1), f(2, 1), f(17, 6), f(4, 1), f(8, 1)]);
    }

    #[test]
    fn sector_too_wide_is_reported() {
        let p = PlateParams::new(1.0, 0.0, 1.0).unwrap();
        let rep = check_parabolicity(
            &nl_terms(&p),
            Some(&p),
            PI / 4.0,
            0.01,
            &SamplingSpec { moduli: 4, args: 3, ..Default::default() },
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(rep.status, ParabolicityStatus::SectorTooWide);
    }

    #[test]
    fn critically_damped_plate_is_parabolic() {
        let p = PlateParams::new(1.0, 0.0, 2.0).unwrap();
        let spec = SamplingSpec { moduli: 12, args: 9, ..Default::default() };
        let rep = check_parabolicity(&nl_terms(&p), Some(&p), PI / 4.0, PI / 32.0, &spec, Execution::available()).unwrap();
        assert_eq!(rep.phi0, 0.0);
        assert_eq!(rep.status, ParabolicityStatus::Pass, "{rep:?}");
    }

    #[test]
    fn heat_like_symbol_is_parabolic() {
        let terms = [MixedTerm::int(1.0, 1, 0, 0), MixedTerm::int(1.0, 0, 4, 0)];
        let spec = SamplingSpec { moduli: 16, args: 17, ..Default::default() };
        let rep = check_parabolicity(&terms, None, PI / 4.0, PI / 16.0, &spec, Execution::Sequential).unwrap();
        assert_eq!(rep.status, ParabolicityStatus::Pass, "{rep:?}");
    }

    #[test]
    fn vanishing_principal_part_fails() {
        // λ − z² vanishes at λ = z² > 0, which the grid hits exactly
        let terms = [MixedTerm::int(1.0, 1, 0, 0), MixedTerm::int(-1.0, 0, 2, 0)];
        let spec = SamplingSpec { moduli: 7, args: 9, ..Default::default() };
        let rep = check_parabolicity(&terms, None, PI / 4.0, PI / 3.0, &spec, Execution::Sequential).unwrap();
        assert_eq!(rep.status, ParabolicityStatus::Fail);
    }

    /// Extreme points of the upper-right chain found by scanning every
    /// candidate weight: each pairwise weight, points between consecutive
    /// ones and both limits.
    fn brute_force_vertices(points: &[Point]) -> Vec<Point> {
        let mut cands: Vec<Rational> = Vec::new();
        for p in points {
            for s in points {
                if s.1 > p.1 && s.0 < p.0 {
                    cands.push((p.0 - s.0) / (s.1 - p.1));
                }
            }
        }
        cands.sort();
        cands.dedup();
        let mut probe = cands.clone();
        for w in cands.windows(2) {
            probe.push((w[0] + w[1]) / 2);
        }
        if let Some(&f) = cands.first() {
            probe.push(f / 2);
        }
        if let Some(&l) = cands.last() {
            probe.push(l * 2);
        }
        let mut out = Vec::new();
        for r in probe {
            let d = points.iter().map(|p| r * p.1 + p.0).max().unwrap();
            let set: Vec<&Point> = points.iter().filter(|p| r * p.1 + p.0 == d).collect();
            out.push(**set.iter().max_by_key(|p| (p.0, p.1)).unwrap());
            out.push(**set.iter().max_by_key(|p| (p.1, p.0)).unwrap());
        }
        out.push(*points.iter().max_by_key(|p| (p.0, p.1)).unwrap());
        out.push(*points.iter().max_by_key(|p| (p.1, p.0)).unwrap());
        out.sort_by(|p, q| q.0.cmp(&p.0).then(p.1.cmp(&q.1)));
        out.dedup();
        out
    }

    fn half_steps() -> impl Strategy<Value = Rational> {
        (0i64..=12).prop_map(|k| Rational::new(k, 2))
    }

    fn term_strategy() -> impl Strategy<Value = MixedTerm> {
        (half_steps(), half_steps(), 0u32..3, 0.1..2.0f64)
            .prop_map(|(a, b, c, k)| MixedTerm::new(Complex64::new(k, 0.0), a, b, c).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn hull_matches_brute_force(terms in prop::collection::vec(term_strategy(), 1..=12)) {
            let poly = build_polygon(&terms).unwrap();
            let expected = brute_force_vertices(&poly.points);
            prop_assert_eq!(&poly.vertices, &expected);
            // weights increase along the chain
            for w in poly.edges.windows(2) {
                prop_assert!(w[0].r < w[1].r);
            }
            // every edge weight equalises its endpoints and dominates all points
            for e in &poly.edges {
                let Weight::Finite(r) = e.r else { unreachable!() };
                let d = r * e.from.1 + e.from.0;
                prop_assert_eq!(d, r * e.to.1 + e.to.0);
                for p in &poly.points {
                    prop_assert!(r * p.1 + p.0 <= d);
                }
            }
        }

        #[test]
        fn hull_invariant_under_permutation_and_splitting(
            terms in prop::collection::vec(term_strategy(), 1..=12),
            seed in 0usize..1000
        ) {
            let poly = build_polygon(&terms).unwrap();
            let mut shuffled = terms.clone();
            let n = shuffled.len();
            shuffled.rotate_left(seed % n);
            shuffled.reverse();
            prop_assert_eq!(&build_polygon(&shuffled).unwrap(), &poly);
            let mut split = terms.clone();
            let t = split.remove(seed % n);
            let half = MixedTerm { coeff: t.coeff / 2.0, ..t };
            split.push(half);
            split.push(half);
            prop_assert_eq!(&build_polygon(&split).unwrap(), &poly);
        }

        #[test]
        fn nl_polygon_for_random_params(a in 1e-3..1e3f64, b in -1e3..1e3f64, g in 1e-3..1e3f64) {
            let poly = build_polygon(&nl_terms(&PlateParams::new(a, b, g).unwrap())).unwrap();
            prop_assert_eq!(
                poly.vertices,
                vec![pt((6, 1), (0, 1)), pt((2, 1), (2, 1)), pt((0, 1), (5, 2))]
            );
        }
    }
}
