//! `simulate` and `check-compat`.

use crate::config::{Initial, RunConfig};
use crate::error::{CliError, CliResult, Code};
use crate::output::{print_checks, say, write_csv, Check, Output};
use fsi_core::nonlinear::compat::CompatOptions;
use fsi_core::nonlinear::{
    check_compatibility, fixed_point_solve, Discretization, FixedPointOptions, NonlinearError, ProblemData,
    Separable, State,
};
use fsi_core::Execution;
use serde_json::json;
use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

/// Plate forcing `amplitude·cos(2πx₁/L)` and, optionally, a divergence-free
/// initial velocity from the stream function `sin(2πx₁/L)·q(xₙ/X)` with
/// `q(s) = (1−s)²(1+2s)`, which has no tangential slip at the plate.
pub fn problem_data(cfg: &RunConfig, disc: &Discretization) -> ProblemData {
    let g = cfg.grid;
    let mut data = ProblemData::zero(g, cfg.params, cfg.p);
    let tl = g.tangential_len();
    let k = 2.0 * PI / g.period;
    if cfg.amplitude != 0.0 {
        data.f_eta = Some(Separable {
            shape: (0..tl).map(|t| cfg.amplitude * (k * g.tangential_point(t)[0]).cos()).collect(),
            profile: cfg.profile,
        });
    }
    if cfg.initial == Initial::Stream {
        let x = g.height;
        let a = cfg.v0_amplitude;
        for i in 0..g.field_len() {
            let s = disc.mesh.x[i / tl] / x;
            let x1 = g.tangential_point(i % tl)[0];
            data.v0[0][i] = -a * (k * x1).sin() * 6.0 * s * (1.0 - s) / x;
            data.v0[g.n - 1][i] = -a * k * (k * x1).cos() * (1.0 - s).powi(2) * (1.0 + 2.0 * s);
        }
        if cfg.eta1_matched {
            data.eta1 = data.v0[g.n - 1][..tl].to_vec();
        }
    }
    data
}

fn discretization(cfg: &RunConfig, exec: Execution) -> CliResult<Discretization> {
    Discretization::new(cfg.grid, exec).map_err(|e| CliError::config(e.to_string()))
}

fn options(cfg: &RunConfig) -> FixedPointOptions {
    FixedPointOptions {
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        residual_tol: cfg.fp_residual_tol,
        ..FixedPointOptions::default()
    }
}

fn write_fields(path: &Path, disc: &Discretization, s: &State) -> CliResult<()> {
    let g = disc.grid();
    let tl = g.tangential_len();
    let mut header: Vec<String> = (1..g.n).map(|d| format!("x{d}")).collect();
    header.push("xn".into());
    header.extend((1..g.n).map(|d| format!("v{d}")));
    header.extend(["vn".into(), "p".into(), "eta".into()]);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..g.field_len()).map(|i| {
        let t = i % tl;
        let mut row: Vec<String> = g.tangential_point(t).iter().map(|x| format!("{x:e}")).collect();
        row.push(format!("{:e}", disc.mesh.x[i / tl]));
        row.extend(s.v.iter().map(|c| format!("{:e}", c[i])));
        row.push(format!("{:e}", s.p[i]));
        row.push(format!("{:e}", s.eta[t]));
        row
    });
    write_csv(BufWriter::new(File::create(path)?), &header, rows)
}

pub fn simulate(cfg: &RunConfig, out: &Output, dir: &Path, exec: Execution) -> CliResult<()> {
    let disc = discretization(cfg, exec)?;
    let data = problem_data(cfg, &disc);
    if out.check {
        let rep = check_compatibility(&disc, &data, &CompatOptions::default());
        let zero = ProblemData::zero(cfg.grid, cfg.params, cfg.p);
        let z = fixed_point_solve(&disc, &zero, &options(cfg));
        let z_ok = matches!(&z, Ok(o) if o.converged && o.iterations == 1);
        let checks = vec![
            Check::new("initial data compatible", rep.passed(), rep.violations.join("; ")),
            Check::new(
                "zero data is a fixed point",
                z_ok,
                match &z {
                    Ok(o) => format!("{} iterations", o.iterations),
                    Err(e) => e.to_string(),
                },
            ),
        ];
        return print_checks(out, &checks);
    }
    std::fs::create_dir_all(dir)?;
    let result = fixed_point_solve(&disc, &data, &options(cfg));
    let summary_path = dir.join("summary.json");
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let (code, iterations, ratios) = match &e {
                NonlinearError::NoContraction { iterations, ratios } => {
                    (Code::NoContraction, *iterations, ratios.clone())
                }
                NonlinearError::ShiftOutOfRange { .. } => (Code::NoContraction, 0, vec![]),
                NonlinearError::IndexBelowThreshold { .. } | NonlinearError::InvalidGrid { .. } => {
                    return Err(CliError::config(e.to_string()))
                }
                _ => (Code::Residual, 0, vec![]),
            };
            let doc = json!({
                "converged": false,
                "iterations": iterations,
                "contraction_ratios": ratios,
                "error": e.to_string(),
            });
            std::fs::write(&summary_path, serde_json::to_string_pretty(&doc)?)?;
            if out.json {
                say!("{}", serde_json::to_string_pretty(&doc)?);
            }
            return Err(CliError::new(code, e.to_string()));
        }
    };
    let steps = outcome.trajectory.iter().enumerate().map(|(k, s)| {
        let res = if k == 0 { 0.0 } else { outcome.step_residuals[k - 1] };
        vec![
            format!("{:e}", s.t),
            format!("{:e}", s.sup_v()),
            format!("{:e}", s.sup_eta()),
            format!("{res:e}"),
        ]
    });
    write_csv(
        BufWriter::new(File::create(dir.join("steps.csv"))?),
        &["t", "v_sup", "eta_sup", "residual"],
        steps,
    )?;
    let last = outcome.trajectory.last().expect("trajectory holds the initial state");
    write_fields(&dir.join("field.csv"), &disc, last)?;
    let doc = serde_json::to_value(&outcome)?;
    std::fs::write(&summary_path, serde_json::to_string_pretty(&doc)?)?;
    if out.json {
        say!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        let max_ratio = outcome.contraction_ratios.iter().cloned().fold(0.0, f64::max);
        say!(
            "converged after {} iterations; max contraction ratio {max_ratio:.3e}; residual {:.2e}",
            outcome.iterations, outcome.residual
        );
        say!("wrote {}", dir.display());
    }
    if !outcome.residual_ok {
        return Err(CliError::new(
            Code::Residual,
            format!("residual {:e} exceeds {:e}", outcome.residual, cfg.fp_residual_tol),
        ));
    }
    Ok(())
}

pub fn check_compat(cfg: &RunConfig, out: &Output, exec: Execution) -> CliResult<()> {
    let disc = discretization(cfg, exec)?;
    if out.check {
        let mut stream = cfg.clone();
        stream.initial = Initial::Stream;
        stream.eta1_matched = true;
        let rep = check_compatibility(&disc, &problem_data(&stream, &disc), &CompatOptions::default());
        let checks = vec![Check::new(
            "integration by parts on a divergence-free state",
            rep.c4.defect <= 1e-10,
            format!("defect {:.2e}", rep.c4.defect),
        )];
        return print_checks(out, &checks);
    }
    let data = problem_data(cfg, &disc);
    let rep = check_compatibility(&disc, &data, &CompatOptions::default());
    if out.json {
        say!("{}", serde_json::to_string_pretty(&rep)?);
    } else {
        for (name, item) in [("C1", &rep.c1), ("C2", &rep.c2), ("C3", &rep.c3), ("C4", &rep.c4)] {
            say!("{name}: {:?} (defect {:.2e}, tol {:.0e})", item.status, item.defect, item.tol);
        }
        for v in &rep.violations {
            say!("violation: {v}");
        }
    }
    if rep.passed() {
        Ok(())
    } else {
        Err(CliError::new(Code::Residual, format!("{} compatibility violations", rep.violations.len())))
    }
}
