//! `index`: Sobolev indices, integrability thresholds and the product
//! catalog, always as JSON.

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{print_checks, say, Check, Output};
use fsi_core::polygon::Rational;
use fsi_core::sobolev::{check_catalog, index, threshold_p, AnisoSpace, Scale};
use serde_json::{json, Value};

fn sob(e: fsi_core::sobolev::SobolevError) -> CliError {
    CliError::config(e.to_string())
}

pub fn run(cfg: &RunConfig, out: &Output) -> CliResult<()> {
    let n = cfg.grid.n as u32;
    let p = cfg.p;
    if out.check {
        let dominance = (2..=cfg.n_max).all(|m| {
            let t = threshold_p(m).expect("m >= 2");
            t.quadratic >= t.multiplier && t.quadratic >= t.triple
        });
        let q = threshold_p(n).map_err(sob)?.quadratic;
        let holds = check_catalog(n, q).map_err(sob)?.iter().all(|r| r.result.holds());
        let checks = vec![
            Check::new("quadratic threshold dominates", dominance, format!("n = 2..={}", cfg.n_max)),
            Check::new("catalog holds at the quadratic threshold", holds, format!("n = {n}, p = {q}")),
        ];
        return print_checks(out, &checks);
    }
    let r = Rational::from_integer;
    let inv = p.recip();
    let spaces: Vec<(&str, AnisoSpace)> = vec![
        ("H1_boundary", AnisoSpace::boundary(Scale::BesselPotential, r(1), n, p).map_err(sob)?),
        ("H0_boundary", AnisoSpace::boundary(Scale::BesselPotential, r(0), n, p).map_err(sob)?),
        ("H2_bulk", AnisoSpace::bulk(Scale::BesselPotential, r(2), n, p).map_err(sob)?),
        ("W(1-1/p)", AnisoSpace::boundary(Scale::SobolevSlobodeckii, r(1) - inv, n, p).map_err(sob)?),
        ("W(2-1/p)", AnisoSpace::boundary(Scale::SobolevSlobodeckii, r(2) - inv, n, p).map_err(sob)?),
        ("W(4-1/p)", AnisoSpace::boundary(Scale::SobolevSlobodeckii, r(4) - inv, n, p).map_err(sob)?),
    ];
    let indices: serde_json::Map<String, Value> =
        spaces.iter().map(|(k, s)| (k.to_string(), json!(index(s).to_string()))).collect();
    let thresholds: Vec<Value> = (2..=cfg.n_max)
        .map(|m| {
            let t = threshold_p(m).expect("m >= 2");
            json!({
                "n": m,
                "quadratic": t.quadratic.to_string(),
                "multiplier": t.multiplier.to_string(),
                "triple": t.triple.to_string(),
            })
        })
        .collect();
    let doc = json!({
        "n": n,
        "p": p.to_string(),
        "indices": indices,
        "thresholds": thresholds,
        "catalog": check_catalog(n, p).map_err(sob)?,
    });
    say!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}
