//! `analyze-symbol` and `polygon`.

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Code};
use crate::output::{print_checks, say, Check, Output};
use fsi_core::polygon::{
    build_polygon, check_parabolicity, eval_terms, m_terms, nl_terms, principal_symbol, representative_weights,
    MixedTerm, NewtonPolygon, ParabolicityStatus, Point, Rational, Weight,
};
use fsi_core::symbol::sector_angle_phi0;
use fsi_core::Execution;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde_json::{json, Value};
use std::f64::consts::PI;

fn point(p: &Point) -> Value {
    json!([p.0.to_f64(), p.1.to_f64()])
}

fn point_label(p: &Point) -> String {
    format!("({}, {})", p.0, p.1)
}

fn polygon_json(poly: &NewtonPolygon) -> Value {
    json!({
        "vertices": poly.vertices.iter().map(point).collect::<Vec<_>>(),
        "edges": poly.edges.iter().map(|e| json!({
            "from": point(&e.from),
            "to": point(&e.to),
            "r": e.r.label(),
            "on_edge": e.on_edge.iter().map(point).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn term_label(t: &MixedTerm) -> String {
    let mut s = format!("{}", t.coeff.re);
    if t.coeff.im != 0.0 {
        s = format!("({})", t.coeff);
    }
    for (sym, e) in [("lambda", t.a), ("z", t.b), ("omega", Rational::from_integer(t.c as i64))] {
        if e == Rational::from_integer(1) {
            s.push_str(&format!(" {sym}"));
        } else if e != Rational::from_integer(0) {
            s.push_str(&format!(" {sym}^{e}"));
        }
    }
    s
}

/// `(φ, θ)` from the configuration, defaulting to the midpoint of `(φ₀, π/2)`
/// and an eighth of the gap.
pub fn sector_angles(cfg: &RunConfig, phi0: f64) -> (f64, f64) {
    let phi = cfg.phi.unwrap_or((phi0 + PI / 2.0) / 2.0);
    let gap = phi - phi0;
    let theta = cfg.theta.unwrap_or(if gap > 0.0 { gap / 8.0 } else { 1e-2 });
    (phi, theta)
}

fn vertex_check(cfg: &RunConfig) -> Check {
    let q = Rational::new;
    let want = vec![(q(6, 1), q(0, 1)), (q(2, 1), q(2, 1)), (q(0, 1), q(5, 2))];
    let got = build_polygon(&nl_terms(&cfg.params)).map(|p| p.vertices);
    let detail = match &got {
        Ok(v) => v.iter().map(point_label).collect::<Vec<_>>().join(" "),
        Err(e) => e.to_string(),
    };
    Check::new("three-vertex polygon", got.as_ref() == Ok(&want), detail)
}

/// Full symbol against each principal part along `λ = e^{iπ/4} z^r` at `z = 10⁴`.
fn principal_check(cfg: &RunConfig) -> Check {
    let terms = nl_terms(&cfg.params);
    let poly = match build_polygon(&terms) {
        Ok(p) => p,
        Err(e) => return Check::new("principal parts dominate", false, e.to_string()),
    };
    let mu = Complex64::from_polar(1.0, PI / 4.0);
    let z = Complex64::new(1e4, 0.0);
    let mut worst: f64 = 0.0;
    for w in representative_weights(&poly) {
        if w == Weight::Infinite {
            continue;
        }
        let lambda = mu * 1e4f64.powf(w.to_f64());
        let p = principal_symbol(&terms, w).eval(lambda, z);
        worst = worst.max((eval_terms(&terms, lambda, z) / p - 1.0).norm());
    }
    Check::new("principal parts dominate", worst < 0.01, format!("max deviation {worst:.2e}"))
}

pub fn analyze_symbol(cfg: &RunConfig, out: &Output, exec: Execution) -> CliResult<()> {
    let phi0 = sector_angle_phi0(&cfg.params);
    if out.check {
        let checks = vec![
            vertex_check(cfg),
            Check::new("phi0 below pi/2", phi0 < PI / 2.0, format!("phi0 = {phi0}")),
            principal_check(cfg),
        ];
        return print_checks(out, &checks);
    }
    let terms = nl_terms(&cfg.params);
    let poly = build_polygon(&terms).map_err(|e| CliError::config(e.to_string()))?;
    let (phi, theta) = sector_angles(cfg, phi0);
    let rep = check_parabolicity(&terms, Some(&cfg.params), phi, theta, &cfg.sampling, exec)
        .map_err(|e| CliError::config(e.to_string()))?;
    let pass = rep.status == ParabolicityStatus::Pass;
    let mut doc = polygon_json(&poly);
    doc["params"] = serde_json::to_value(cfg.params)?;
    doc["phi0"] = json!(phi0);
    doc["parabolicity"] = serde_json::to_value(&rep)?;
    doc["pass"] = json!(pass);
    if out.json {
        say!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        say!("phi0 = {phi0:.6}  phi = {phi:.6}  theta = {theta:.6}");
        say!("vertices: {}", doc["vertices"]);
        for w in &rep.weights {
            say!(
                "r = {:>5}  min |P_r|/scale = {:.3e}  {}",
                w.r.label(),
                w.min_ratio,
                if w.pass { "PASS" } else { "FAIL" }
            );
        }
        if let Some(r) = &rep.roots {
            say!("plate roots: min |arg| = {:.4} (bound {:.4})", r.min_abs_arg, r.bound);
        }
        say!("status: {:?} ({} samples)", rep.status, rep.samples);
    }
    match rep.status {
        ParabolicityStatus::Pass => Ok(()),
        ParabolicityStatus::SectorTooWide => Err(CliError::new(
            Code::Sector,
            format!("phi = {phi} does not exceed phi0 = {phi0}"),
        )),
        ParabolicityStatus::Fail => Err(CliError::new(Code::Sector, "sector condition fails")),
    }
}

pub fn polygon(cfg: &RunConfig, out: &Output, symbol: &str) -> CliResult<()> {
    let terms = match symbol {
        "nl" => nl_terms(&cfg.params),
        "m" => m_terms(&cfg.params),
        s => return Err(CliError::config(format!("unknown symbol {s:?}; expected nl or m"))),
    };
    let poly = build_polygon(&terms).map_err(|e| CliError::config(e.to_string()))?;
    let weights = representative_weights(&poly);
    if out.check {
        let increasing = poly
            .edges
            .windows(2)
            .all(|w| w[0].r < w[1].r);
        let mut checks = vec![Check::new("edge weights increase", increasing, String::new())];
        if symbol == "nl" {
            checks.push(vertex_check(cfg));
        }
        return print_checks(out, &checks);
    }
    let principal: Vec<Value> = weights
        .iter()
        .map(|&w| {
            let p = principal_symbol(&terms, w);
            json!({
                "r": w.label(),
                "omega": format!("{:?}", p.omega),
                "terms": p.terms.iter().map(term_label).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut doc = polygon_json(&poly);
    doc["principal"] = json!(principal);
    if out.json {
        say!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        say!("vertices: {}", doc["vertices"]);
        for e in &poly.edges {
            say!("edge {} -> {}  r = {}", point_label(&e.from), point_label(&e.to), e.r.label());
        }
        for p in &principal {
            say!("r = {}: {}", p["r"].as_str().unwrap_or(""), p["terms"]);
        }
    }
    Ok(())
}
