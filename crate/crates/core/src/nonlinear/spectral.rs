//! Tangential FFTs and derivatives on level-major fields.

use super::grid::{Grid, Mesh};
use crate::exec::Execution;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    exec: Execution,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid, exec: Execution) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            grid,
            fwd: planner.plan_fft_forward(grid.modes),
            inv: planner.plan_fft_inverse(grid.modes),
            exec,
        }
    }

    pub fn exec(&self) -> Execution {
        self.exec
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.modes;
        plan.process(data);
        if self.grid.n == 3 {
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for b in 0..n {
                for a in 0..n {
                    col[a] = data[a * n + b];
                }
                plan.process(&mut col);
                for a in 0..n {
                    data[a * n + b] = col[a];
                }
            }
        }
    }

    /// Unnormalized forward transform of one tangential layer.
    pub fn forward_layer(&self, layer: &[f64]) -> Vec<Complex64> {
        let mut c: Vec<Complex64> = layer.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut c, &self.fwd);
        c
    }

    /// Inverse of [`Spectral::forward_layer`], keeping the real part.
    pub fn inverse_layer(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut c = coeffs.to_vec();
        self.transform(&mut c, &self.inv);
        let scale = 1.0 / coeffs.len() as f64;
        c.iter().map(|z| z.re * scale).collect()
    }

    pub fn forward(&self, field: &[f64]) -> Vec<Complex64> {
        let p = self.grid.tangential_len();
        let layers = self.exec.map_range(field.len() / p, |j| self.forward_layer(&field[j * p..(j + 1) * p]));
        layers.concat()
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let p = self.grid.tangential_len();
        let layers = self.exec.map_range(coeffs.len() / p, |j| self.inverse_layer(&coeffs[j * p..(j + 1) * p]));
        layers.concat()
    }

    /// Applies `mult(k)` to every mode and zeroes the Nyquist modes.
    pub fn filter<F>(&self, field: &[f64], mult: F) -> Vec<f64>
    where
        F: Fn(usize) -> Complex64 + Sync,
    {
        let p = self.grid.tangential_len();
        let layers = self.exec.map_range(field.len() / p, |j| {
            let mut c = self.forward_layer(&field[j * p..(j + 1) * p]);
            for (k, ck) in c.iter_mut().enumerate() {
                *ck = if self.grid.is_nyquist(k) { Complex64::new(0.0, 0.0) } else { *ck * mult(k) };
            }
            self.inverse_layer(&c)
        });
        layers.concat()
    }

    /// Removes the Nyquist modes.
    pub fn project(&self, field: &[f64]) -> Vec<f64> {
        self.filter(field, |_| Complex64::new(1.0, 0.0))
    }

    /// Spectral `∂/∂x_dir` for a tangential direction `dir < n − 1`.
    pub fn d_tangential(&self, field: &[f64], dir: usize) -> Vec<f64> {
        let g = self.grid;
        self.filter(field, |k| Complex64::new(0.0, g.wave_vector(k)[dir]))
    }

    /// Tangential Laplacian `Δ′`.
    pub fn laplacian(&self, field: &[f64]) -> Vec<f64> {
        let g = self.grid;
        self.filter(field, |k| {
            let z2: f64 = g.wave_vector(k).iter().map(|x| x * x).sum();
            Complex64::new(-z2, 0.0)
        })
    }
}

/// `∂ₙ` by the collocation matrix, applied column by column.
pub fn d_normal(mesh: &Mesh, field: &[f64]) -> Vec<f64> {
    apply_levels(mesh, &mesh.d1, field)
}

pub fn d_normal2(mesh: &Mesh, field: &[f64]) -> Vec<f64> {
    apply_levels(mesh, &mesh.d2, field)
}

fn apply_levels(mesh: &Mesh, mat: &nalgebra::DMatrix<f64>, field: &[f64]) -> Vec<f64> {
    let (m, p) = (mesh.levels(), mesh.tangential_len());
    let mut out = vec![0.0; m * p];
    for j in 0..m {
        let row = &mut out[j * p..(j + 1) * p];
        for l in 0..m {
            let a = mat[(j, l)];
            if a == 0.0 {
                continue;
            }
            for (o, f) in row.iter_mut().zip(&field[l * p..(l + 1) * p]) {
                *o += a * f;
            }
        }
    }
    out
}

/// Level `j` of a level-major field.
pub fn level(field: &[f64], p: usize, j: usize) -> &[f64] {
    &field[j * p..(j + 1) * p]
}

pub fn sup(field: &[f64]) -> f64 {
    field.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivatives_of_trig_fields() {
        for n in [2, 3] {
            let grid = Grid::new(n, 2.0, 8, 8.0, 16, 0.0, 0.1).unwrap();
            let sp = Spectral::new(grid, Execution::Sequential);
            let p = grid.tangential_len();
            let f: Vec<f64> = (0..2 * p)
                .map(|i| {
                    let x = grid.tangential_point(i % p);
                    let lev = (i / p) as f64 + 1.0;
                    lev * (PI * x[0]).sin() * if n == 3 { (2.0 * PI * x[1]).cos() } else { 1.0 }
                })
                .collect();
            let d0 = sp.d_tangential(&f, 0);
            let lap = sp.laplacian(&f);
            for i in 0..2 * p {
                let x = grid.tangential_point(i % p);
                let lev = (i / p) as f64 + 1.0;
                let c = if n == 3 { (2.0 * PI * x[1]).cos() } else { 1.0 };
                assert!((d0[i] - lev * PI * (PI * x[0]).cos() * c).abs() < 1e-12);
                let k2 = PI * PI + if n == 3 { 4.0 * PI * PI } else { 0.0 };
                assert!((lap[i] + k2 * f[i]).abs() < 1e-11);
            }
            let back = sp.inverse(&sp.forward(&f));
            assert!(f.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-13));
        }
    }

    #[test]
    fn nyquist_is_removed() {
        let grid = Grid::new(2, 1.0, 8, 8.0, 16, 0.0, 0.1).unwrap();
        let sp = Spectral::new(grid, Execution::Sequential);
        let f: Vec<f64> = (0..8).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(sup(&sp.project(&f)) < 1e-15);
    }
}
