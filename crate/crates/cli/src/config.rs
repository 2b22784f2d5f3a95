//! Run configuration: flat `key = value` files with `#` comments, overridden
//! by `--set key=value` flags.

use crate::error::{CliError, CliResult};
use fsi_core::nonlinear::{Grid, TimeProfile};
use fsi_core::polygon::{Rational, SamplingSpec};
use fsi_core::resolvent::Coupling;
use fsi_core::sobolev::threshold_p;
use fsi_core::PlateParams;
use std::collections::BTreeMap;
use std::path::Path;

/// Every accepted key with its default; `auto` is resolved from other keys.
const KEYS: &[(&str, &str)] = &[
    ("alpha", "1"),
    ("beta", "0"),
    ("gamma", "1"),
    ("coupling", "exact"),
    ("phi", "auto"),
    ("theta", "auto"),
    ("moduli", "24"),
    ("args", "17"),
    ("min_modulus", "1e-3"),
    ("max_modulus", "1e3"),
    ("threshold", "1e-3"),
    ("lambda_min", "0.1"),
    ("lambda_max", "100"),
    ("lambda_arg", "0.7853981633974483"),
    ("z_min", "0.1"),
    ("z_max", "10"),
    ("residual_tol", "1e-8"),
    ("n", "2"),
    ("p", "auto"),
    ("L", "2"),
    ("N", "32"),
    ("X", "auto"),
    ("M", "64"),
    ("T", "0.5"),
    ("dt", "0.015625"),
    ("amplitude", "1e-3"),
    ("profile", "step"),
    ("max_iter", "50"),
    ("tol", "1e-10"),
    ("fp_residual_tol", "1e-6"),
    ("initial", "zero"),
    ("v0_amplitude", "0.1"),
    ("eta1", "matched"),
    ("n_max", "10"),
];

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: PlateParams,
    pub coupling: Coupling,
    pub phi: Option<f64>,
    pub theta: Option<f64>,
    pub sampling: SamplingSpec,
    pub lambda_range: (f64, f64),
    pub lambda_arg: f64,
    pub z_range: (f64, f64),
    pub residual_tol: f64,
    pub grid: Grid,
    pub p: Rational,
    pub amplitude: f64,
    pub profile: TimeProfile,
    pub max_iter: usize,
    pub tol: f64,
    pub fp_residual_tol: f64,
    pub initial: Initial,
    pub v0_amplitude: f64,
    pub eta1_matched: bool,
    pub n_max: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Initial {
    Zero,
    Stream,
}

fn bad(key: &str, value: &str, reason: &str) -> CliError {
    CliError::config(format!("invalid value for {key} = {value:?}: {reason}"))
}

/// Parses `key = value` lines.
pub fn parse_text(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_assignment(s: &str) -> CliResult<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("expected key=value, got {s:?}")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Exact rational from `a/b`, an integer or a decimal literal.
pub fn parse_rational(s: &str) -> Option<Rational> {
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (i64, i64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
        return (b != 0).then(|| Rational::new(a, b));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let scale = 10i64.checked_pow(frac.len() as u32)?;
    let neg = int.starts_with('-');
    let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
    let part: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let num = whole.checked_mul(scale)?.checked_add(if neg { -part } else { part })?;
    Some(Rational::new(num, scale))
}

fn parse_profile(s: &str) -> Option<TimeProfile> {
    let (name, arg) = s.split_once(':').unwrap_or((s, ""));
    let rate = || arg.parse::<f64>().ok().filter(|r| r.is_finite());
    Some(match name {
        "step" => TimeProfile::Step,
        "ramp" => TimeProfile::Ramp,
        "exp" => TimeProfile::Exp { rate: rate()? },
        "sin" => TimeProfile::Sin { freq: rate()? },
        "softstep" => TimeProfile::SoftStep { rate: rate()? },
        _ => return None,
    })
}

pub struct RawConfig(BTreeMap<String, String>);

impl RawConfig {
    pub fn new(file: Option<&Path>, overrides: &[(String, String)]) -> CliResult<Self> {
        let mut map: BTreeMap<String, String> = KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let mut set = |k: String, v: String| -> CliResult<()> {
            if !map.contains_key(&k) {
                let known: Vec<&str> = KEYS.iter().map(|(k, _)| *k).collect();
                return Err(CliError::config(format!("unknown key {k:?}; known keys: {}", known.join(", "))));
            }
            map.insert(k, v);
            Ok(())
        };
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            for (k, v) in parse_text(&text)? {
                set(k, v)?;
            }
        }
        for (k, v) in overrides {
            set(k.clone(), v.clone())?;
        }
        Ok(RawConfig(map))
    }

    fn get(&self, key: &str) -> &str {
        &self.0[key]
    }

    fn f64(&self, key: &str) -> CliResult<f64> {
        let v = self.get(key);
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(key, v, "expected a finite number"))
    }

    fn positive(&self, key: &str) -> CliResult<f64> {
        let x = self.f64(key)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(bad(key, self.get(key), "must be positive"))
        }
    }

    fn usize(&self, key: &str) -> CliResult<usize> {
        let v = self.get(key);
        v.parse().map_err(|_| bad(key, v, "expected a non-negative integer"))
    }

    fn auto_f64(&self, key: &str) -> CliResult<Option<f64>> {
        if self.get(key) == "auto" {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    pub fn resolve(&self) -> CliResult<RunConfig> {
        let params = PlateParams::new(self.f64("alpha")?, self.f64("beta")?, self.f64("gamma")?)
            .map_err(|e| CliError::config(e.to_string()))?;
        let coupling = match self.get("coupling") {
            "exact" => Coupling::Exact,
            "printed" => Coupling::AsPrinted,
            v => return Err(bad("coupling", v, "expected exact or printed")),
        };
        let sampling = SamplingSpec {
            moduli: self.usize("moduli")?,
            args: self.usize("args")?,
            min_modulus: self.positive("min_modulus")?,
            max_modulus: self.positive("max_modulus")?,
            threshold: self.positive("threshold")?,
        };
        if sampling.moduli == 0 {
            return Err(bad("moduli", self.get("moduli"), "must be positive"));
        }
        if sampling.args == 0 {
            return Err(bad("args", self.get("args"), "must be positive"));
        }
        if sampling.max_modulus < sampling.min_modulus {
            return Err(bad("max_modulus", self.get("max_modulus"), "must be at least min_modulus"));
        }
        let lambda_range = (self.positive("lambda_min")?, self.positive("lambda_max")?);
        if lambda_range.1 < lambda_range.0 {
            return Err(bad("lambda_max", self.get("lambda_max"), "must be at least lambda_min"));
        }
        let lambda_arg = self.f64("lambda_arg")?;
        if lambda_arg.abs() >= std::f64::consts::PI {
            return Err(bad("lambda_arg", self.get("lambda_arg"), "must lie in (-pi, pi)"));
        }
        let z_range = (self.f64("z_min")?, self.f64("z_max")?);
        if z_range.0 < 0.0 {
            return Err(bad("z_min", self.get("z_min"), "must be non-negative"));
        }
        if z_range.1 < z_range.0 {
            return Err(bad("z_max", self.get("z_max"), "must be at least z_min"));
        }

        let n = self.usize("n")?;
        let period = self.f64("L")?;
        let height = self.auto_f64("X")?.unwrap_or(8.0 * period);
        let grid = Grid::new(n, period, self.usize("N")?, height, self.usize("M")?, self.f64("T")?, self.f64("dt")?)
            .map_err(|e| CliError::config(e.to_string()))?;
        let p = match self.get("p") {
            "auto" => threshold_p(n as u32).map_err(|e| CliError::config(e.to_string()))?.quadratic,
            v => parse_rational(v)
                .filter(|p| *p > Rational::from_integer(1))
                .ok_or_else(|| bad("p", v, "expected a rational number greater than 1"))?,
        };
        let profile = parse_profile(self.get("profile"))
            .ok_or_else(|| bad("profile", self.get("profile"), "expected step, ramp, exp:R, sin:W or softstep:R"))?;
        let initial = match self.get("initial") {
            "zero" => Initial::Zero,
            "stream" => Initial::Stream,
            v => return Err(bad("initial", v, "expected zero or stream")),
        };
        let eta1_matched = match self.get("eta1") {
            "matched" => true,
            "zero" => false,
            v => return Err(bad("eta1", v, "expected matched or zero")),
        };
        let n_max = self.usize("n_max")?;
        if !(2..=1000).contains(&n_max) {
            return Err(bad("n_max", self.get("n_max"), "must lie in 2..=1000"));
        }
        Ok(RunConfig {
            params,
            coupling,
            phi: self.auto_f64("phi")?,
            theta: self.auto_f64("theta")?,
            sampling,
            lambda_range,
            lambda_arg,
            z_range,
            residual_tol: self.positive("residual_tol")?,
            grid,
            p,
            amplitude: self.f64("amplitude")?,
            profile,
            max_iter: self.usize("max_iter")?,
            tol: self.positive("tol")?,
            fp_residual_tol: self.positive("fp_residual_tol")?,
            initial,
            v0_amplitude: self.f64("v0_amplitude")?,
            eta1_matched,
            n_max: n_max as u32,
        })
    }
}
