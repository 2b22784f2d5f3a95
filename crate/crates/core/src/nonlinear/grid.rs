//! Periodic-in-x′, bounded-in-xₙ grid and the operators derived from it.
//!
//! Physical fields are stored level by level: entry `j * P + t` holds the
//! value at height `x_j` and tangential point `t`, where `P = N^{n−1}`. For
//! `n = 3` the tangential index is row-major, `t = i₁·N + i₂`.

use super::NonlinearError;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Spatial dimension, 2 or 3.
    pub n: usize,
    /// Period of the tangential torus.
    pub period: f64,
    /// Modes per tangential direction.
    pub modes: usize,
    /// Truncation height of the normal direction.
    pub height: f64,
    /// Number of normal levels.
    pub levels: usize,
    pub t_final: f64,
    pub dt: f64,
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> NonlinearError {
    NonlinearError::InvalidGrid { name, value, reason }
}

impl Grid {
    pub fn new(
        n: usize,
        period: f64,
        modes: usize,
        height: f64,
        levels: usize,
        t_final: f64,
        dt: f64,
    ) -> Result<Self, NonlinearError> {
        let g = Grid { n, period, modes, height, levels, t_final, dt };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), NonlinearError> {
        if self.n != 2 && self.n != 3 {
            return Err(invalid("n", self.n as f64, "must be 2 or 3"));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(invalid("L", self.period, "must be positive"));
        }
        if self.modes < 8 || !self.modes.is_power_of_two() {
            return Err(invalid("N", self.modes as f64, "must be a power of two >= 8"));
        }
        if !(self.height.is_finite() && self.height >= 4.0 * self.period) {
            return Err(invalid("X", self.height, "must be at least 4 L"));
        }
        if self.levels < 16 {
            return Err(invalid("M", self.levels as f64, "must be at least 16"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", self.dt, "must be positive"));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(invalid("T", self.t_final, "must be non-negative"));
        }
        let ratio = self.t_final / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(invalid("T", self.t_final, "must be an integer multiple of dt"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Number of tangential points, `N^{n−1}`.
    pub fn tangential_len(&self) -> usize {
        self.modes.pow(self.n as u32 - 1)
    }

    pub fn field_len(&self) -> usize {
        self.levels * self.tangential_len()
    }

    /// Coordinates of tangential point `t`.
    pub fn tangential_point(&self, t: usize) -> Vec<f64> {
        let h = self.period / self.modes as f64;
        match self.n {
            2 => vec![t as f64 * h],
            _ => vec![(t / self.modes) as f64 * h, (t % self.modes) as f64 * h],
        }
    }

    /// Signed integer frequency of FFT index `k`.
    fn signed(&self, k: usize) -> i64 {
        let n = self.modes as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    fn split(&self, k: usize) -> Vec<usize> {
        match self.n {
            2 => vec![k],
            _ => vec![k / self.modes, k % self.modes],
        }
    }

    /// Wave vector `ξ′` of mode `k`.
    pub fn wave_vector(&self, k: usize) -> Vec<f64> {
        let base = 2.0 * PI / self.period;
        self.split(k).into_iter().map(|c| base * self.signed(c) as f64).collect()
    }

    pub fn is_nyquist(&self, k: usize) -> bool {
        self.split(k).into_iter().any(|c| c == self.modes / 2)
    }

    /// Index of the mode carrying the complex conjugate coefficient.
    pub fn conjugate(&self, k: usize) -> usize {
        let n = self.modes;
        match self.n {
            2 => (n - k) % n,
            _ => {
                let (a, b) = (k / n, k % n);
                ((n - a) % n) * n + (n - b) % n
            }
        }
    }

    /// Non-Nyquist modes that represent each conjugate pair once.
    pub fn canonical_modes(&self) -> Vec<usize> {
        (0..self.tangential_len())
            .filter(|&k| !self.is_nyquist(k) && k <= self.conjugate(k))
            .collect()
    }
}

/// Chebyshev–Lobatto nodes on `[0, X]` and the matching collocation
/// operators.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub grid: Grid,
    /// Normal nodes, increasing from `0` to `X`.
    pub x: Vec<f64>,
    /// First derivative matrix in `xₙ`.
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    bary: Vec<f64>,
}

impl Mesh {
    pub fn new(grid: Grid) -> Result<Self, NonlinearError> {
        grid.validate()?;
        let m = grid.levels;
        let nn = (m - 1) as f64;
        // Reference nodes s_j = cos(πj/(M−1)) run from 1 to −1; x = X(1 − s)/2.
        let s: Vec<f64> = (0..m).map(|j| (PI * j as f64 / nn).cos()).collect();
        let x: Vec<f64> = s.iter().map(|&sj| grid.height * (1.0 - sj) / 2.0).collect();
        let c = |j: usize| {
            let e = if j == 0 || j == m - 1 { 2.0 } else { 1.0 };
            if j % 2 == 0 {
                e
            } else {
                -e
            }
        };
        let mut ds = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    ds[(i, j)] = c(i) / c(j) / (s[i] - s[j]);
                }
            }
        }
        for i in 0..m {
            let row: f64 = (0..m).filter(|&j| j != i).map(|j| ds[(i, j)]).sum();
            ds[(i, i)] = -row;
        }
        let d1 = ds * (-2.0 / grid.height);
        let d2 = &d1 * &d1;
        let bary = (0..m).map(|j| 1.0 / c(j)).collect();
        Ok(Mesh { grid, x, d1, d2, bary })
    }

    pub fn levels(&self) -> usize {
        self.grid.levels
    }

    pub fn tangential_len(&self) -> usize {
        self.grid.tangential_len()
    }

    /// Row `q` holds the weights that evaluate the polynomial interpolant of
    /// nodal values at `points[q]`.
    pub fn interpolation_matrix(&self, points: &[f64]) -> DMatrix<f64> {
        let m = self.levels();
        let mut e = DMatrix::<f64>::zeros(points.len(), m);
        for (q, &y) in points.iter().enumerate() {
            if let Some(j) = self.x.iter().position(|&xj| (xj - y).abs() < 1e-14 * self.grid.height) {
                e[(q, j)] = 1.0;
                continue;
            }
            let terms: Vec<f64> = (0..m).map(|j| self.bary[j] / (y - self.x[j])).collect();
            let total: f64 = terms.iter().sum();
            for j in 0..m {
                e[(q, j)] = terms[j] / total;
            }
        }
        e
    }
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(q: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let qf = q as f64;
    for i in 0..q.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=q {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = qf * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[i] = -t;
        nodes[q - 1 - i] = t;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    (
        nodes.iter().map(|t| mid + half * t).collect(),
        weights.iter().map(|w| w * half).collect(),
    )
}
