//! Picard iteration `w_{k+1} = L⁻¹(N(w_k) + f)` for the flattened system,
//! where `L⁻¹` runs the linear stepper over `[0, T]` and `N` is evaluated on
//! the stored trajectory of the previous iterate.

use super::data::{ProblemData, State};
use super::spectral::{d_normal, sup};
use super::stepper::{LinearStepper, StepRhs};
use super::terms::{eval_nonlinearity, Nonlinearity};
use super::{Discretization, NonlinearError};
use crate::sobolev::threshold_p;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointOptions {
    pub max_iter: usize,
    /// Relative size of the last update at which the iteration stops.
    pub tol: f64,
    /// A ratio above this counts as a failure to contract.
    pub ratio_limit: f64,
    /// Number of consecutive failures that ends the iteration.
    pub patience: usize,
    /// Radius of the ball the iterates must stay in.
    pub radius: f64,
    /// Required relative residual of the converged trajectory.
    pub residual_tol: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            max_iter: 50,
            tol: 1e-10,
            ratio_limit: 0.95,
            patience: 3,
            radius: 1e6,
            residual_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointOutcome {
    pub converged: bool,
    pub iterations: usize,
    /// `‖w_{k+1} − w_k‖ / ‖w_k − w_{k−1}‖` for each iteration after the first.
    pub contraction_ratios: Vec<f64>,
    /// `‖w_{k+1} − w_k‖` for each iteration, starting from `w_0 = 0`.
    pub differences: Vec<f64>,
    /// States at `t = 0, dt, …, T`.
    #[serde(skip)]
    pub trajectory: Vec<State>,
    /// Relative residual of the discrete system at each step.
    pub step_residuals: Vec<f64>,
    pub residual: f64,
    pub residual_ok: bool,
}

/// Max-norm surrogate of a state: the fields together with `∂ₙv`, `∇′η` and
/// `Δ′η`.
pub fn state_norm(disc: &Discretization, s: &State) -> f64 {
    let sp = &disc.spectral;
    let mut r = s.sup_v().max(sup(&s.p)).max(s.sup_eta()).max(sup(&s.eta_t));
    for c in &s.v {
        r = r.max(sup(&d_normal(&disc.mesh, c)));
    }
    for d in 0..disc.grid().n - 1 {
        r = r.max(sup(&sp.d_tangential(&s.eta, d)));
    }
    r.max(sup(&sp.laplacian(&s.eta)))
}

fn trajectory_norm(disc: &Discretization, traj: &[State]) -> f64 {
    disc.spectral.exec().map(traj, |s| state_norm(disc, s)).into_iter().fold(0.0, f64::max)
}

fn add_nonlinearity(mut rhs: StepRhs, nl: &Nonlinearity) -> StepRhs {
    for (a, b) in rhs.f_v.iter_mut().zip(&nl.f_v) {
        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    }
    rhs.g.iter_mut().zip(&nl.g).for_each(|(x, y)| *x += y);
    rhs.f_eta.iter_mut().zip(&nl.h_eta).for_each(|(x, y)| *x += y);
    rhs
}

fn project(disc: &Discretization, s: &State) -> State {
    let sp = &disc.spectral;
    State {
        v: s.v.iter().map(|c| sp.project(c)).collect(),
        p: sp.project(&s.p),
        eta: sp.project(&s.eta),
        eta_t: sp.project(&s.eta_t),
        t: s.t,
    }
}

fn sweep(
    stepper: &LinearStepper,
    data: &ProblemData,
    init: &State,
    nonlin: &[Nonlinearity],
) -> Result<Vec<State>, NonlinearError> {
    let mut traj = Vec::with_capacity(nonlin.len() + 1);
    traj.push(init.clone());
    for (k, nl) in nonlin.iter().enumerate() {
        let t = (k + 1) as f64 * stepper.dt();
        let rhs = add_nonlinearity(StepRhs::from_data(data, t), nl);
        let next = stepper.step(&traj[k], &rhs)?;
        traj.push(next);
    }
    Ok(traj)
}

fn no_contraction(iterations: usize, ratios: &[f64]) -> NonlinearError {
    NonlinearError::NoContraction { iterations, ratios: ratios.to_vec() }
}

/// Runs the iteration until the relative update falls below `opts.tol`.
///
/// Fails with `IndexBelowThreshold` if `p < (n+2)/3`, and with
/// `NoContraction` if the ratios exceed `opts.ratio_limit` for
/// `opts.patience` consecutive iterations, if an iterate leaves the ball of
/// radius `opts.radius` or becomes non-finite, or if `opts.max_iter` is
/// reached.
pub fn fixed_point_solve(
    disc: &Discretization,
    data: &ProblemData,
    opts: &FixedPointOptions,
) -> Result<FixedPointOutcome, NonlinearError> {
    data.validate()?;
    let g = disc.grid();
    let required = threshold_p(g.n as u32).expect("grid dimension is validated").quadratic;
    if data.p_exponent < required {
        return Err(NonlinearError::IndexBelowThreshold { p: data.p_exponent, required });
    }
    let stepper = LinearStepper::new(disc, data.params, g.dt)?;
    let exec = disc.spectral.exec();
    let init = project(disc, &data.initial_state());
    let steps = g.steps();

    let mut prev: Vec<State> = (0..=steps)
        .map(|k| State { t: k as f64 * g.dt, ..State::zeros(&g) })
        .collect();
    let zero_nl = Nonlinearity {
        f_v: vec![vec![0.0; g.field_len()]; g.n],
        g: vec![0.0; g.field_len()],
        h_eta: vec![0.0; g.tangential_len()],
    };
    let mut nonlin = vec![zero_nl; steps];
    let mut differences = Vec::new();
    let mut ratios = Vec::new();
    let mut strikes = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let traj = match sweep(&stepper, data, &init, &nonlin) {
            Ok(t) => t,
            Err(NonlinearError::NonFinite { .. }) => return Err(no_contraction(iterations, &ratios)),
            Err(e) => return Err(e),
        };
        let diffs: Vec<State> = traj.iter().zip(&prev).map(|(a, b)| a.sub(b)).collect();
        let diff = trajectory_norm(disc, &diffs);
        let size = trajectory_norm(disc, &traj);
        if !diff.is_finite() || !(size <= opts.radius) {
            return Err(no_contraction(iterations, &ratios));
        }
        if let Some(&last) = differences.last() {
            let ratio = if last > 0.0 { diff / last } else { 0.0 };
            ratios.push(ratio);
            strikes = if ratio > opts.ratio_limit { strikes + 1 } else { 0 };
        }
        differences.push(diff);
        let shift = traj.iter().map(|s| s.sup_eta()).fold(0.0, f64::max);
        if shift > g.height / 4.0 {
            return Err(NonlinearError::ShiftOutOfRange { sup: shift, limit: g.height / 4.0 });
        }
        nonlin = exec.map(&traj[1..], |s| eval_nonlinearity(disc, s));
        prev = traj;
        if diff <= opts.tol * size || diff == 0.0 {
            converged = true;
            break;
        }
        if strikes >= opts.patience {
            return Err(no_contraction(iterations, &ratios));
        }
    }
    if !converged {
        return Err(no_contraction(iterations, &ratios));
    }

    let step_residuals: Vec<f64> = exec.map_range(steps, |k| {
        let t = (k + 1) as f64 * g.dt;
        let rhs = add_nonlinearity(StepRhs::from_data(data, t), &nonlin[k]);
        let (res, scale) = stepper.residual(&prev[k], &prev[k + 1], &rhs);
        if scale > 0.0 {
            res / scale
        } else {
            res
        }
    });
    let residual = step_residuals.iter().cloned().fold(0.0, f64::max);
    Ok(FixedPointOutcome {
        converged,
        iterations,
        contraction_ratios: ratios,
        differences,
        trajectory: prev,
        step_residuals,
        residual,
        residual_ok: residual <= opts.residual_tol,
    })
}
