//! Problem data, time profiles and the solution state.

use super::grid::Grid;
use super::spectral::sup;
use super::NonlinearError;
use crate::polygon::Rational;
use crate::symbol::PlateParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Scalar time dependence of a separable forcing. Every profile has a closed
/// form Laplace transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TimeProfile {
    Step,
    Ramp,
    Exp { rate: f64 },
    Sin { freq: f64 },
    /// `1 − e^{−a t}(1 + a t)`, which starts with zero value and slope.
    SoftStep { rate: f64 },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Step => 1.0,
            TimeProfile::Ramp => t,
            TimeProfile::Exp { rate } => (-rate * t).exp(),
            TimeProfile::Sin { freq } => (freq * t).sin(),
            TimeProfile::SoftStep { rate } => 1.0 - (-rate * t).exp() * (1.0 + rate * t),
        }
    }

    pub fn laplace(&self, lambda: Complex64) -> Complex64 {
        match *self {
            TimeProfile::Step => lambda.inv(),
            TimeProfile::Ramp => (lambda * lambda).inv(),
            TimeProfile::Exp { rate } => (lambda + rate).inv(),
            TimeProfile::Sin { freq } => freq / (lambda * lambda + freq * freq),
            TimeProfile::SoftStep { rate } => {
                let q = lambda + rate;
                lambda.inv() - q.inv() - rate / (q * q)
            }
        }
    }

    /// Largest `|value|` on `[0, t]`.
    pub fn sup_on(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Step => 1.0,
            TimeProfile::Ramp => t.abs(),
            TimeProfile::Exp { rate } => {
                if rate >= 0.0 {
                    1.0
                } else {
                    (-rate * t).exp()
                }
            }
            TimeProfile::Sin { freq } => {
                if (freq * t).abs() >= std::f64::consts::FRAC_PI_2 {
                    1.0
                } else {
                    (freq * t).sin().abs()
                }
            }
            TimeProfile::SoftStep { .. } => self.value(t).abs(),
        }
    }
}

/// A forcing `shape(x) · profile(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separable<S> {
    pub shape: S,
    pub profile: TimeProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemData {
    pub grid: Grid,
    pub params: PlateParams,
    pub f_v: Option<Separable<Vec<Vec<f64>>>>,
    pub g: Option<Separable<Vec<f64>>>,
    pub f_eta: Option<Separable<Vec<f64>>>,
    pub v0: Vec<Vec<f64>>,
    pub eta0: Vec<f64>,
    pub eta1: Vec<f64>,
    pub p_exponent: Rational,
}

impl ProblemData {
    /// Zero forcing and zero initial data.
    pub fn zero(grid: Grid, params: PlateParams, p_exponent: Rational) -> Self {
        let (fl, tl) = (grid.field_len(), grid.tangential_len());
        ProblemData {
            grid,
            params,
            f_v: None,
            g: None,
            f_eta: None,
            v0: vec![vec![0.0; fl]; grid.n],
            eta0: vec![0.0; tl],
            eta1: vec![0.0; tl],
            p_exponent,
        }
    }

    pub fn validate(&self) -> Result<(), NonlinearError> {
        self.grid.validate()?;
        let (fl, tl) = (self.grid.field_len(), self.grid.tangential_len());
        let mismatch = |what: &'static str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(NonlinearError::ShapeMismatch { what, got, want })
            }
        };
        mismatch("v0 components", self.v0.len(), self.grid.n)?;
        for c in &self.v0 {
            mismatch("v0", c.len(), fl)?;
        }
        mismatch("eta0", self.eta0.len(), tl)?;
        mismatch("eta1", self.eta1.len(), tl)?;
        if let Some(f) = &self.f_v {
            mismatch("f_v components", f.shape.len(), self.grid.n)?;
            for c in &f.shape {
                mismatch("f_v", c.len(), fl)?;
            }
        }
        if let Some(g) = &self.g {
            mismatch("g", g.shape.len(), fl)?;
        }
        if let Some(f) = &self.f_eta {
            mismatch("f_eta", f.shape.len(), tl)?;
        }
        Ok(())
    }

    pub fn f_v_at(&self, t: f64) -> Vec<Vec<f64>> {
        match &self.f_v {
            Some(f) => {
                let a = f.profile.value(t);
                f.shape.iter().map(|c| c.iter().map(|x| a * x).collect()).collect()
            }
            None => vec![vec![0.0; self.grid.field_len()]; self.grid.n],
        }
    }

    pub fn g_at(&self, t: f64) -> Vec<f64> {
        match &self.g {
            Some(g) => {
                let a = g.profile.value(t);
                g.shape.iter().map(|x| a * x).collect()
            }
            None => vec![0.0; self.grid.field_len()],
        }
    }

    pub fn f_eta_at(&self, t: f64) -> Vec<f64> {
        match &self.f_eta {
            Some(f) => {
                let a = f.profile.value(t);
                f.shape.iter().map(|x| a * x).collect()
            }
            None => vec![0.0; self.grid.tangential_len()],
        }
    }

    /// Discrete max-norm surrogate of all data on `[0, T]`.
    pub fn norm(&self) -> f64 {
        let t = self.grid.t_final;
        let mut s: f64 = 0.0;
        if let Some(f) = &self.f_v {
            s = s.max(f.shape.iter().map(|c| sup(c)).fold(0.0, f64::max) * f.profile.sup_on(t));
        }
        if let Some(g) = &self.g {
            s = s.max(sup(&g.shape) * g.profile.sup_on(t));
        }
        if let Some(f) = &self.f_eta {
            s = s.max(sup(&f.shape) * f.profile.sup_on(t));
        }
        for c in &self.v0 {
            s = s.max(sup(c));
        }
        s.max(sup(&self.eta0)).max(sup(&self.eta1))
    }

    pub fn initial_state(&self) -> State {
        State {
            v: self.v0.clone(),
            p: vec![0.0; self.grid.field_len()],
            eta: self.eta0.clone(),
            eta_t: self.eta1.clone(),
            t: 0.0,
        }
    }
}

/// Velocity, pressure and plate fields at one time. `v` has `n` components,
/// the last one normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub v: Vec<Vec<f64>>,
    pub p: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_t: Vec<f64>,
    pub t: f64,
}

impl State {
    pub fn zeros(grid: &Grid) -> Self {
        State {
            v: vec![vec![0.0; grid.field_len()]; grid.n],
            p: vec![0.0; grid.field_len()],
            eta: vec![0.0; grid.tangential_len()],
            eta_t: vec![0.0; grid.tangential_len()],
            t: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().flatten().chain(&self.p).chain(&self.eta).chain(&self.eta_t).all(|x| x.is_finite())
    }

    pub fn sup_v(&self) -> f64 {
        self.v.iter().map(|c| sup(c)).fold(0.0, f64::max)
    }

    pub fn sup_eta(&self) -> f64 {
        sup(&self.eta)
    }

    /// `self − other`, keeping the time of `self`.
    pub fn sub(&self, other: &State) -> State {
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
        State {
            v: self.v.iter().zip(&other.v).map(|(a, b)| d(a, b)).collect(),
            p: d(&self.p, &other.p),
            eta: d(&self.eta, &other.eta),
            eta_t: d(&self.eta_t, &other.eta_t),
            t: self.t,
        }
    }

    pub fn scaled(&self, s: f64) -> State {
        let m = |a: &[f64]| a.iter().map(|x| s * x).collect::<Vec<_>>();
        State {
            v: self.v.iter().map(|c| m(c)).collect(),
            p: m(&self.p),
            eta: m(&self.eta),
            eta_t: m(&self.eta_t),
            t: self.t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_transforms_match_quadrature() {
        let profiles = [
            TimeProfile::Step,
            TimeProfile::Ramp,
            TimeProfile::Exp { rate: 1.5 },
            TimeProfile::Sin { freq: 2.0 },
            TimeProfile::SoftStep { rate: 3.0 },
        ];
        let lam = Complex64::new(2.0, 1.0);
        for pr in profiles {
            // composite Simpson on [0, 40]
            let (n, b) = (40000, 40.0);
            let h = b / n as f64;
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..=n {
                let t = i as f64 * h;
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                s += w * (-lam * t).exp() * pr.value(t);
            }
            s *= h / 3.0;
            assert!((s - pr.laplace(lam)).norm() < 1e-9, "{pr:?}");
        }
    }

    #[test]
    fn shapes_are_checked() {
        let grid = Grid::new(2, 1.0, 8, 8.0, 16, 0.5, 0.25).unwrap();
        let mut d = ProblemData::zero(grid, PlateParams::default(), Rational::new(2, 1));
        assert!(d.validate().is_ok());
        d.eta1.pop();
        assert!(matches!(d.validate(), Err(NonlinearError::ShapeMismatch { what: "eta1", .. })));
    }
}
