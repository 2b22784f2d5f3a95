//! The nonlinear terms of the flattened system,
//!
//! ```text
//! F_v = (∂_tη − Δ′η)∂ₙv − 2(∇′η·∇′)∂ₙv + |∇′η|²∂ₙ²v − (v·∇)v + (v′·∇′η)∂ₙv + (∇′η, 0)ᵀ∂ₙp
//! G   = ∇′η·∂ₙv′
//! H_η = −∇′η·∂ₙv′ − ∇′η·∇′vⁿ        at xₙ = 0
//! ```

use super::data::State;
use super::spectral::{d_normal, d_normal2};
use super::Discretization;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Nonlinearity {
    pub f_v: Vec<Vec<f64>>,
    pub g: Vec<f64>,
    pub h_eta: Vec<f64>,
}

impl Nonlinearity {
    pub fn sup(&self) -> f64 {
        use super::spectral::sup;
        self.f_v.iter().map(|c| sup(c)).fold(sup(&self.g), f64::max).max(sup(&self.h_eta))
    }
}

struct Shared {
    grad_eta: Vec<Vec<f64>>,
    dn_v: Vec<Vec<f64>>,
}

fn shared(disc: &Discretization, s: &State) -> Shared {
    let n = disc.grid().n;
    Shared {
        grad_eta: (0..n - 1).map(|d| disc.spectral.d_tangential(&s.eta, d)).collect(),
        dn_v: s.v.iter().map(|c| d_normal(&disc.mesh, c)).collect(),
    }
}

fn eval_g_with(disc: &Discretization, sh: &Shared) -> Vec<f64> {
    let p = disc.mesh.tangential_len();
    let len = disc.grid().field_len();
    let mut g = vec![0.0; len];
    for (d, ge) in sh.grad_eta.iter().enumerate() {
        for (i, gi) in g.iter_mut().enumerate() {
            *gi += ge[i % p] * sh.dn_v[d][i];
        }
    }
    g
}

fn eval_h_with(disc: &Discretization, s: &State, sh: &Shared) -> Vec<f64> {
    let n = disc.grid().n;
    let p = disc.mesh.tangential_len();
    let vn0 = &s.v[n - 1][..p];
    let mut h = vec![0.0; p];
    for (d, ge) in sh.grad_eta.iter().enumerate() {
        let dvn = disc.spectral.d_tangential(vn0, d);
        for t in 0..p {
            h[t] -= ge[t] * (sh.dn_v[d][t] + dvn[t]);
        }
    }
    h
}

pub fn eval_g(disc: &Discretization, s: &State) -> Vec<f64> {
    eval_g_with(disc, &shared(disc, s))
}

pub fn eval_h_eta(disc: &Discretization, s: &State) -> Vec<f64> {
    eval_h_with(disc, s, &shared(disc, s))
}

fn eval_fv_with(disc: &Discretization, s: &State, sh: &Shared) -> Vec<Vec<f64>> {
    let n = disc.grid().n;
    let p = disc.mesh.tangential_len();
    let len = disc.grid().field_len();
    let sp = &disc.spectral;
    let lap_eta = sp.laplacian(&s.eta);
    let grad2: Vec<f64> = (0..p).map(|t| sh.grad_eta.iter().map(|g| g[t] * g[t]).sum()).collect();
    let dn_p = d_normal(&disc.mesh, &s.p);
    // v′·∇′η, level by level
    let tilt: Vec<f64> = (0..len)
        .map(|i| (0..n - 1).map(|d| s.v[d][i] * sh.grad_eta[d][i % p]).sum())
        .collect();
    disc.spectral.exec().map_range(n, |c| {
        let dn = &sh.dn_v[c];
        let dnn = d_normal2(&disc.mesh, &s.v[c]);
        let tang: Vec<Vec<f64>> = (0..n - 1).map(|d| sp.d_tangential(&s.v[c], d)).collect();
        let mixed: Vec<Vec<f64>> = (0..n - 1).map(|d| sp.d_tangential(dn, d)).collect();
        (0..len)
            .map(|i| {
                let t = i % p;
                let mut f = (s.eta_t[t] - lap_eta[t]) * dn[i] + grad2[t] * dnn[i] + tilt[i] * dn[i];
                for d in 0..n - 1 {
                    f -= 2.0 * sh.grad_eta[d][t] * mixed[d][i];
                    f -= s.v[d][i] * tang[d][i];
                }
                f -= s.v[n - 1][i] * dn[i];
                if c < n - 1 {
                    f += sh.grad_eta[c][t] * dn_p[i];
                }
                f
            })
            .collect()
    })
}

pub fn eval_fv(disc: &Discretization, s: &State) -> Vec<Vec<f64>> {
    eval_fv_with(disc, s, &shared(disc, s))
}

/// All three terms, sharing the common derivatives.
pub fn eval_nonlinearity(disc: &Discretization, s: &State) -> Nonlinearity {
    let sh = shared(disc, s);
    Nonlinearity {
        f_v: eval_fv_with(disc, s, &sh),
        g: eval_g_with(disc, &sh),
        h_eta: eval_h_with(disc, s, &sh),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::nonlinear::grid::Grid;
    use crate::nonlinear::spectral::sup;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn disc(n: usize) -> Discretization {
        Discretization::new(Grid::new(n, 1.0, 8, 8.0, 16, 0.0, 0.1).unwrap(), Execution::Sequential).unwrap()
    }

    fn random_state(d: &Discretization, rng: &mut ChaCha8Rng) -> State {
        let g = d.grid();
        let p = g.tangential_len();
        let smooth = |rng: &mut ChaCha8Rng, levels: bool| -> Vec<f64> {
            let a: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let len = if levels { g.field_len() } else { p };
            (0..len)
                .map(|i| {
                    let x = g.tangential_point(i % p);
                    let y = if levels { d.mesh.x[i / p] } else { 0.0 };
                    let ang = 2.0 * PI * x.iter().sum::<f64>();
                    (a[0] * ang.sin() + a[1] * ang.cos() + a[2]) * (-(y - a[3]).powi(2) / 4.0).exp()
                })
                .collect()
        };
        State {
            v: (0..g.n).map(|_| smooth(rng, true)).collect(),
            p: smooth(rng, true),
            eta: smooth(rng, false),
            eta_t: smooth(rng, false),
            t: 0.0,
        }
    }

    #[test]
    fn flat_plate_leaves_only_transport() {
        let d = disc(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = random_state(&d, &mut rng);
        s.eta = vec![0.0; 8];
        s.eta_t = vec![0.0; 8];
        let nl = eval_nonlinearity(&d, &s);
        assert_eq!(sup(&nl.g), 0.0);
        assert_eq!(sup(&nl.h_eta), 0.0);
        let dn: Vec<Vec<f64>> = s.v.iter().map(|c| d_normal(&d.mesh, c)).collect();
        for c in 0..2 {
            let dx = d.spectral.d_tangential(&s.v[c], 0);
            for i in 0..d.grid().field_len() {
                let conv = s.v[0][i] * dx[i] + s.v[1][i] * dn[c][i];
                assert!((nl.f_v[c][i] + conv).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_velocity_gives_zero_terms() {
        let d = disc(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = random_state(&d, &mut rng);
        s.v = vec![vec![0.0; d.grid().field_len()]; 3];
        s.p = vec![0.0; d.grid().field_len()];
        let nl = eval_nonlinearity(&d, &s);
        assert_eq!(nl.sup(), 0.0);
    }

    #[test]
    fn manufactured_divergence_term() {
        let d = disc(2);
        let g = d.grid();
        let mut s = State::zeros(&g);
        s.eta = (0..8).map(|t| (2.0 * PI * g.tangential_point(t)[0]).sin()).collect();
        s.v[0] = (0..g.field_len()).map(|i| d.mesh.x[i / 8]).collect();
        let gt = eval_g(&d, &s);
        for (i, gi) in gt.iter().enumerate() {
            let x = g.tangential_point(i % 8)[0];
            assert!((gi - 2.0 * PI * (2.0 * PI * x).cos()).abs() < 1e-11);
        }
        let h = eval_h_eta(&d, &s);
        for (t, ht) in h.iter().enumerate() {
            let x = g.tangential_point(t)[0];
            assert!((ht + 2.0 * PI * (2.0 * PI * x).cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn terms_are_at_least_quadratic() {
        for n in [2, 3] {
            let d = disc(n);
            let mut rng = ChaCha8Rng::seed_from_u64(11 + n as u64);
            let w = random_state(&d, &mut rng);
            let norms: Vec<Nonlinearity> =
                [1e-2, 1e-3, 1e-4].iter().map(|&s| eval_nonlinearity(&d, &w.scaled(s))).collect();
            let slope = |a: f64, b: f64| (a / b).log10();
            for c in 0..n {
                let v: Vec<f64> = norms.iter().map(|x| sup(&x.f_v[c])).collect();
                assert!(slope(v[0], v[1]) > 1.99 && slope(v[1], v[2]) > 1.99, "{v:?}");
            }
            let gs: Vec<f64> = norms.iter().map(|x| sup(&x.g)).collect();
            let hs: Vec<f64> = norms.iter().map(|x| sup(&x.h_eta)).collect();
            assert!(slope(gs[0], gs[1]) > 1.99 && slope(hs[1], hs[2]) > 1.99);
        }
    }
}
