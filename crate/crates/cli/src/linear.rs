//! `solve-linear`: per-frequency solution of the linear problem with its
//! residual check.

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Code};
use crate::output::{print_checks, print_csv, say, Check, Output};
use fsi_core::resolvent::{build_field_profile, residual_check, solve_traces};
use fsi_core::{Execution, Freq};
use num_complex::Complex64;
use serde::Serialize;

pub struct LinearArgs {
    pub grid: (usize, usize),
    pub lambda: Option<Complex64>,
    pub z: Option<f64>,
    /// Perturbs each computed profile before the residual check.
    pub corrupt: bool,
}

pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected AxB, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad grid size {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad grid size {b:?}"))?;
    if a == 0 || b == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok((a, b))
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`; exponents such as `1e-3` are allowed.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || format!("cannot parse complex number {s:?}");
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| err());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| err())?,
    };
    let re = re.parse::<f64>().map_err(|_| err())?;
    Ok(Complex64::new(re, im))
}

fn spaced(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![lo];
    }
    let step = |i: usize| i as f64 / (k - 1) as f64;
    if lo > 0.0 {
        (0..k).map(|i| (lo.ln() + (hi / lo).ln() * step(i)).exp()).collect()
    } else {
        (0..k).map(|i| lo + (hi - lo) * step(i)).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub re_lambda: f64,
    pub im_lambda: f64,
    pub z: f64,
    pub abs_eta: f64,
    pub abs_p0: f64,
    pub residual_max: f64,
    pub pass: bool,
    /// relative defect of `φ̂ⁿ = λη̂`
    #[serde(skip)]
    pub kinematic: f64,
    /// relative defect of the trace relation implied by `div v = 0`
    #[serde(skip)]
    pub closure: f64,
}

fn solve_point(cfg: &RunConfig, lambda: Complex64, z: f64, corrupt: bool) -> Result<Row, String> {
    let f = Freq::new(lambda, z).map_err(|e| e.to_string())?;
    let one = Complex64::new(1.0, 0.0);
    let tr = solve_traces(&cfg.params, f, None, one, cfg.coupling).map_err(|e| e.to_string())?;
    let mut prof = build_field_profile(&tr).map_err(|e| e.to_string())?;
    if corrupt {
        prof.pressure.cz += 1e-3 * (1.0 + prof.pressure.cz.norm());
    }
    let rep = residual_check(&cfg.params, &prof, tr.eta_hat, one, cfg.residual_tol);
    let rel = |(v, s): (Complex64, f64)| if s > 0.0 { v.norm() / s } else { v.norm() };
    Ok(Row {
        re_lambda: lambda.re,
        im_lambda: lambda.im,
        z,
        abs_eta: tr.eta_hat.norm(),
        abs_p0: tr.p0_hat.norm(),
        residual_max: rep.residual_max,
        pass: rep.pass,
        kinematic: rel(tr.kinematic_defect()),
        closure: rel(tr.divergence_closure_defect()),
    })
}

fn points(cfg: &RunConfig, args: &LinearArgs) -> CliResult<Vec<(Complex64, f64)>> {
    match (args.lambda, args.z) {
        (Some(l), Some(z)) => {
            if !(z >= 0.0 && z.is_finite()) {
                return Err(CliError::config(format!("invalid value for z: {z} must be non-negative")));
            }
            Ok(vec![(l, z)])
        }
        (None, None) => {
            let lams = spaced(cfg.lambda_range.0, cfg.lambda_range.1, args.grid.0);
            let zs = spaced(cfg.z_range.0, cfg.z_range.1, args.grid.1);
            Ok(lams
                .iter()
                .flat_map(|&r| zs.iter().map(move |&z| (Complex64::from_polar(r, cfg.lambda_arg), z)))
                .collect())
        }
        _ => Err(CliError::config("--lambda and --z must be given together")),
    }
}

pub fn solve_linear(cfg: &RunConfig, out: &Output, args: &LinearArgs, exec: Execution) -> CliResult<()> {
    let pts = points(cfg, args)?;
    let results = exec.map(&pts, |&(l, z)| solve_point(cfg, l, z, args.corrupt));
    let mut rows = Vec::with_capacity(results.len());
    for (r, (l, z)) in results.into_iter().zip(&pts) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                eprintln!("lambda = {l}, z = {z}: {e}");
                rows.push(Row {
                    re_lambda: l.re,
                    im_lambda: l.im,
                    z: *z,
                    abs_eta: f64::NAN,
                    abs_p0: f64::NAN,
                    residual_max: f64::INFINITY,
                    pass: false,
                    kinematic: f64::NAN,
                    closure: f64::NAN,
                });
            }
        }
    }
    if out.check {
        let worst = |f: fn(&Row) -> f64| rows.iter().map(f).fold(0.0, f64::max);
        let checks = vec![
            Check::new(
                "residuals within tolerance",
                rows.iter().all(|r| r.pass),
                format!("max {:.2e}", worst(|r| r.residual_max)),
            ),
            Check::new(
                "kinematic trace identity",
                worst(|r| r.kinematic) <= 1e-12,
                format!("max {:.2e}", worst(|r| r.kinematic)),
            ),
            Check::new(
                "divergence trace closure",
                worst(|r| r.closure) <= 1e-12,
                format!("max {:.2e}", worst(|r| r.closure)),
            ),
        ];
        return print_checks(out, &checks);
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    if out.json {
        let doc = serde_json::json!({ "rows": rows, "failed": failed });
        say!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        let header = ["re_lambda", "im_lambda", "z", "abs_eta", "abs_p0", "residual_max", "pass"];
        let lines = rows.iter().map(|r| {
            vec![
                format!("{:e}", r.re_lambda),
                format!("{:e}", r.im_lambda),
                format!("{:e}", r.z),
                format!("{:e}", r.abs_eta),
                format!("{:e}", r.abs_p0),
                format!("{:e}", r.residual_max),
                r.pass.to_string(),
            ]
        });
        print_csv(&header, lines)?;
    }
    if failed > 0 {
        return Err(CliError::new(Code::Residual, format!("{failed} of {} rows fail the residual check", rows.len())));
    }
    Ok(())
}
