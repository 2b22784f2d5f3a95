//! Implicit Euler for the linear Stokes–plate system, one tangential mode at a
//! time.
//!
//! Per mode `ξ′` (`z = |ξ′|`, `s = 1/dt`) the unknowns are the tangential
//! velocities `u_i`, the normal velocity `w` and the pressure `q` at the
//! collocation nodes. The rows are
//!
//! ```text
//! u_i:  u_i(0) = 0,  (s + z²)u_i − D²u_i + iξ_i q = s u_i^old + f_i,  u_i(X) = 0
//! w:    −2Dw(0) + q(0) − (s + c₀dt + γz²) w(0) = f_η − s ζ^old + c₀ η^old
//!       (s + z²)w − D²w + Dq = s w^old + f_n   (interior),   w(X) = 0
//! q:    iξ′·u + Dw = g   at every node
//! ```
//!
//! with `c₀ = αz⁴ + βz²`, `ζ = w(0)` and `η = η^old + dt ζ`. For `ξ′ = 0` the
//! continuity row at `xₙ = 0` is replaced by the normal momentum row at
//! `xₙ = X`.

use super::data::{ProblemData, State};
use super::{Discretization, NonlinearError};
use crate::symbol::PlateParams;
use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smallest admissible ratio of the smallest to the largest LU pivot.
pub const PIVOT_RATIO_MIN: f64 = 1e-14;

/// Right-hand sides at the new time level, in physical space.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRhs {
    pub f_v: Vec<Vec<f64>>,
    pub g: Vec<f64>,
    pub f_eta: Vec<f64>,
}

impl StepRhs {
    pub fn zeros(disc: &Discretization) -> Self {
        let g = disc.grid();
        StepRhs {
            f_v: vec![vec![0.0; g.field_len()]; g.n],
            g: vec![0.0; g.field_len()],
            f_eta: vec![0.0; g.tangential_len()],
        }
    }

    /// Data forcing of `data` at time `t`.
    pub fn from_data(data: &ProblemData, t: f64) -> Self {
        StepRhs { f_v: data.f_v_at(t), g: data.g_at(t), f_eta: data.f_eta_at(t) }
    }
}

struct ModeSystem {
    k: usize,
    matrix: DMatrix<Complex64>,
    lu: LU<Complex64, Dyn, Dyn>,
}

/// Mode coefficients of everything a step reads.
struct Spectra {
    v: Vec<Vec<Complex64>>,
    eta: Vec<Complex64>,
    eta_t: Vec<Complex64>,
    f_v: Vec<Vec<Complex64>>,
    g: Vec<Complex64>,
    f_eta: Vec<Complex64>,
}

pub struct LinearStepper<'a> {
    disc: &'a Discretization,
    params: PlateParams,
    dt: f64,
    systems: Vec<ModeSystem>,
}

impl<'a> LinearStepper<'a> {
    /// Assembles and factors the system of every canonical mode.
    pub fn new(disc: &'a Discretization, params: PlateParams, dt: f64) -> Result<Self, NonlinearError> {
        let canon = disc.grid().canonical_modes();
        let built = disc.spectral.exec().map(&canon, |&k| {
            let matrix = assemble(disc, &params, dt, k);
            let lu = matrix.clone().lu();
            let diag = lu.u().diagonal();
            let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d.norm()), hi.max(d.norm())));
            if !(lo > PIVOT_RATIO_MIN * hi) {
                return Err(NonlinearError::SolverSingular { mode: k, condition: hi / lo });
            }
            Ok(ModeSystem { k, matrix, lu })
        });
        let systems = built.into_iter().collect::<Result<Vec<_>, _>>()?;
        Ok(LinearStepper { disc, params, dt, systems })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn spectra(&self, old: &State, rhs: &StepRhs) -> Spectra {
        let sp = &self.disc.spectral;
        Spectra {
            v: old.v.iter().map(|c| sp.forward(c)).collect(),
            eta: sp.forward_layer(&old.eta),
            eta_t: sp.forward_layer(&old.eta_t),
            f_v: rhs.f_v.iter().map(|c| sp.forward(c)).collect(),
            g: sp.forward(&rhs.g),
            f_eta: sp.forward_layer(&rhs.f_eta),
        }
    }

    fn rhs_vector(&self, sys: &ModeSystem, s: &Spectra) -> DVector<Complex64> {
        let g = self.disc.grid();
        let (n, m, p, k) = (g.n, g.levels, g.tangential_len(), sys.k);
        let z2: f64 = g.wave_vector(k).iter().map(|x| x * x).sum();
        let c0 = self.params.alpha * z2 * z2 + self.params.beta * z2;
        let sdt = 1.0 / self.dt;
        let at = |f: &[Complex64], j: usize| f[j * p + k];
        let mut b = DVector::<Complex64>::zeros((n + 1) * m);
        for c in 0..n {
            for j in 1..m - 1 {
                b[c * m + j] = sdt * at(&s.v[c], j) + at(&s.f_v[c], j);
            }
        }
        let w = (n - 1) * m;
        b[w] = s.f_eta[k] - sdt * s.eta_t[k] + c0 * s.eta[k];
        for j in 0..m {
            b[n * m + j] = at(&s.g, j);
        }
        if z2 == 0.0 {
            b[n * m] = sdt * at(&s.v[n - 1], m - 1) + at(&s.f_v[n - 1], m - 1);
        }
        b
    }

    /// One implicit Euler step from `old` to `old.t + dt` with right-hand
    /// sides `rhs` taken at the new time.
    pub fn step(&self, old: &State, rhs: &StepRhs) -> Result<State, NonlinearError> {
        let g = self.disc.grid();
        let (n, m, p) = (g.n, g.levels, g.tangential_len());
        let spectra = self.spectra(old, rhs);
        let sols = self.disc.spectral.exec().map(&self.systems, |sys| {
            sys.lu.solve(&self.rhs_vector(sys, &spectra)).ok_or(NonlinearError::SolverSingular {
                mode: sys.k,
                condition: f64::INFINITY,
            })
        });
        let zero = Complex64::new(0.0, 0.0);
        let mut coeffs = vec![vec![zero; m * p]; n + 1];
        for (sys, sol) in self.systems.iter().zip(sols) {
            let x = sol?;
            let (k, kc) = (sys.k, g.conjugate(sys.k));
            for (c, field) in coeffs.iter_mut().enumerate() {
                for j in 0..m {
                    let mut val = x[c * m + j];
                    if k == kc {
                        val.im = 0.0;
                    }
                    field[j * p + k] = val;
                    field[j * p + kc] = val.conj();
                }
            }
        }
        let sp = &self.disc.spectral;
        let mut fields: Vec<Vec<f64>> = coeffs.iter().map(|c| sp.inverse(c)).collect();
        let pressure = fields.pop().unwrap();
        let eta_t = fields[n - 1][..p].to_vec();
        let eta = old.eta.iter().zip(&eta_t).map(|(e, z)| e + self.dt * z).collect();
        let new = State { v: fields, p: pressure, eta, eta_t, t: old.t + self.dt };
        if !new.is_finite() {
            return Err(NonlinearError::NonFinite { t: new.t });
        }
        Ok(new)
    }

    /// Residual of the discrete step equations for the pair `(old, new)`:
    /// `(max |residual|, max row scale)`, where a row scale is the sum of the
    /// moduli of its terms.
    pub fn residual(&self, old: &State, new: &State, rhs: &StepRhs) -> (f64, f64) {
        let g = self.disc.grid();
        let (n, m, p) = (g.n, g.levels, g.tangential_len());
        let sp = &self.disc.spectral;
        let spectra = self.spectra(old, rhs);
        let mut unknowns: Vec<Vec<Complex64>> = new.v.iter().map(|c| sp.forward(c)).collect();
        unknowns.push(sp.forward(&new.p));
        let per_mode = self.disc.spectral.exec().map(&self.systems, |sys| {
            let x = DVector::from_fn((n + 1) * m, |r, _| unknowns[r / m][(r % m) * p + sys.k]);
            let b = self.rhs_vector(sys, &spectra);
            let ax = &sys.matrix * &x;
            let mut res: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for r in 0..x.len() {
                res = res.max((ax[r] - b[r]).norm());
                let row: f64 = (0..x.len()).map(|c| (sys.matrix[(r, c)] * x[c]).norm()).sum();
                scale = scale.max(row + b[r].norm());
            }
            (res / p as f64, scale / p as f64)
        });
        let (mut res, mut scale) = per_mode.into_iter().fold((0.0f64, 0.0f64), |(a, b), (r, s)| (a.max(r), b.max(s)));
        for t in 0..p {
            let kin = new.eta_t[t] - new.v[n - 1][t];
            let upd = new.eta[t] - old.eta[t] - self.dt * new.eta_t[t];
            res = res.max(kin.abs()).max(upd.abs());
            scale = scale.max(new.eta_t[t].abs() + new.v[n - 1][t].abs());
            scale = scale.max(new.eta[t].abs() + old.eta[t].abs() + self.dt * new.eta_t[t].abs());
        }
        (res, scale)
    }
}

fn assemble(disc: &Discretization, params: &PlateParams, dt: f64, k: usize) -> DMatrix<Complex64> {
    let g = disc.grid();
    let (n, m) = (g.n, g.levels);
    let xi = g.wave_vector(k);
    let z2: f64 = xi.iter().map(|x| x * x).sum();
    let c0 = params.alpha * z2 * z2 + params.beta * z2;
    let sdt = 1.0 / dt;
    let (d1, d2) = (&disc.mesh.d1, &disc.mesh.d2);
    let size = (n + 1) * m;
    let mut a = DMatrix::<Complex64>::zeros(size, size);
    let (w, q) = ((n - 1) * m, n * m);
    let re = |x: f64| Complex64::new(x, 0.0);
    let momentum = |a: &mut DMatrix<Complex64>, row: usize, comp: usize, j: usize| {
        for l in 0..m {
            a[(row, comp * m + l)] = re(-d2[(j, l)]);
        }
        a[(row, comp * m + j)] += sdt + z2;
        if comp < n - 1 {
            a[(row, q + j)] = I * xi[comp];
        } else {
            for l in 0..m {
                a[(row, q + l)] = re(d1[(j, l)]);
            }
        }
    };
    for c in 0..n - 1 {
        a[(c * m, c * m)] = re(1.0);
        for j in 1..m - 1 {
            momentum(&mut a, c * m + j, c, j);
        }
        a[(c * m + m - 1, c * m + m - 1)] = re(1.0);
    }
    for l in 0..m {
        a[(w, w + l)] = re(-2.0 * d1[(0, l)]);
    }
    a[(w, q)] = re(1.0);
    a[(w, w)] -= sdt + c0 * dt + params.gamma * z2;
    for j in 1..m - 1 {
        momentum(&mut a, w + j, n - 1, j);
    }
    a[(w + m - 1, w + m - 1)] = re(1.0);
    for j in 0..m {
        for c in 0..n - 1 {
            a[(q + j, c * m + j)] = I * xi[c];
        }
        for l in 0..m {
            a[(q + j, w + l)] = re(d1[(j, l)]);
        }
    }
    if z2 == 0.0 {
        for c in 0..size {
            a[(q, c)] = re(0.0);
        }
        momentum(&mut a, q, n - 1, m - 1);
    }
    a
}

/// One step of the linear problem for `data` from `state`, assembling the
/// mode systems afresh. Prefer [`LinearStepper`] for repeated steps.
pub fn linear_step(disc: &Discretization, data: &ProblemData, state: &State) -> Result<State, NonlinearError> {
    let stepper = LinearStepper::new(disc, data.params, data.grid.dt)?;
    stepper.step(state, &StepRhs::from_data(data, state.t + data.grid.dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::nonlinear::data::{Separable, TimeProfile};
    use crate::nonlinear::grid::Grid;
    use crate::nonlinear::spectral::{d_normal, sup};
    use crate::polygon::Rational;
    use std::f64::consts::PI;

    fn disc(n: usize, modes: usize, levels: usize, dt: f64) -> Discretization {
        Discretization::new(Grid::new(n, 1.0, modes, 8.0, levels, 0.0, dt).unwrap(), Execution::Sequential).unwrap()
    }

    fn divergence(d: &Discretization, s: &State) -> Vec<f64> {
        let n = d.grid().n;
        let mut div = d_normal(&d.mesh, &s.v[n - 1]);
        for c in 0..n - 1 {
            for (a, b) in div.iter_mut().zip(d.spectral.d_tangential(&s.v[c], c)) {
                *a += b;
            }
        }
        div
    }

    #[test]
    fn zero_data_stays_zero() {
        let d = disc(2, 8, 16, 0.01);
        let st = LinearStepper::new(&d, PlateParams::default(), 0.01).unwrap();
        let s0 = State::zeros(&d.grid());
        let s1 = st.step(&s0, &StepRhs::zeros(&d)).unwrap();
        assert_eq!(s1.sup_v(), 0.0);
        assert_eq!(sup(&s1.p), 0.0);
        assert_eq!(s1.sup_eta(), 0.0);
    }

    #[test]
    fn single_mode_forcing_stays_single_mode_and_solenoidal() {
        for n in [2, 3] {
            let d = disc(n, 8, 24, 0.01);
            let g = d.grid();
            let st = LinearStepper::new(&d, PlateParams::default(), 0.01).unwrap();
            let mut rhs = StepRhs::zeros(&d);
            rhs.f_eta = (0..g.tangential_len()).map(|t| (2.0 * PI * g.tangential_point(t)[0]).cos()).collect();
            let mut s = State::zeros(&g);
            for _ in 0..5 {
                let next = st.step(&s, &rhs).unwrap();
                let (res, scale) = st.residual(&s, &next, &rhs);
                assert!(res <= 1e-10 * scale, "{res} {scale}");
                s = next;
            }
            assert!(sup(&divergence(&d, &s)) < 1e-10 * s.sup_v().max(1e-300) + 1e-13);
            let p = g.tangential_len();
            for field in s.v.iter().chain([&s.p]) {
                let c = d.spectral.forward(field);
                for (i, ci) in c.iter().enumerate() {
                    let k = i % p;
                    let x = g.wave_vector(k);
                    let on = x[0].abs() == 2.0 * PI && x.iter().skip(1).all(|&y| y == 0.0);
                    if !on {
                        assert!(ci.norm() < 1e-12 * p as f64, "{n} {i} {ci}");
                    }
                }
            }
            assert!(s.sup_eta() > 0.0);
        }
    }

    #[test]
    fn data_driven_step_matches_stepper() {
        let g = Grid::new(2, 1.0, 8, 8.0, 16, 0.02, 0.01).unwrap();
        let d = Discretization::new(g, Execution::Sequential).unwrap();
        let mut data = ProblemData::zero(g, PlateParams::default(), Rational::new(2, 1));
        data.f_eta = Some(Separable { shape: (0..8).map(|t| (2.0 * PI * t as f64 / 8.0).sin()).collect(), profile: TimeProfile::Step });
        let s1 = linear_step(&d, &data, &data.initial_state()).unwrap();
        let st = LinearStepper::new(&d, data.params, g.dt).unwrap();
        let s1b = st.step(&data.initial_state(), &StepRhs::from_data(&data, 0.01)).unwrap();
        assert_eq!(s1, s1b);
        assert!((s1.t - 0.01).abs() < 1e-15);
    }
}
