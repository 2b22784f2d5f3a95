//! The graph transform `θ(x′, xₙ) = (x′, xₙ + η(x′))` that flattens the fluid
//! domain, applied to sampled fields by linear interpolation in `xₙ`.

use super::grid::Mesh;
use super::spectral::{sup, Spectral};
use super::NonlinearError;

fn check_shift(mesh: &Mesh, eta: &[f64]) -> Result<(), NonlinearError> {
    let limit = mesh.grid.height / 4.0;
    let s = sup(eta);
    if !(s <= limit) {
        return Err(NonlinearError::ShiftOutOfRange { sup: s, limit });
    }
    Ok(())
}

/// Linear interpolation of column `t` at height `y`, extrapolating linearly
/// past either end.
fn sample(mesh: &Mesh, field: &[f64], t: usize, y: f64) -> f64 {
    let (x, p) = (&mesh.x, mesh.tangential_len());
    let m = x.len();
    let i = match x.partition_point(|&xj| xj <= y) {
        0 => 0,
        k if k >= m => m - 2,
        k => k - 1,
    };
    let (a, b) = (field[i * p + t], field[(i + 1) * p + t]);
    a + (b - a) * (y - x[i]) / (x[i + 1] - x[i])
}

fn shift(mesh: &Mesh, eta: &[f64], field: &[f64], sign: f64) -> Result<Vec<f64>, NonlinearError> {
    check_shift(mesh, eta)?;
    let (m, p) = (mesh.levels(), mesh.tangential_len());
    let mut out = vec![0.0; m * p];
    for j in 0..m {
        for t in 0..p {
            out[j * p + t] = sample(mesh, field, t, mesh.x[j] + sign * eta[t]);
        }
    }
    Ok(out)
}

/// `v = u ∘ θ`, i.e. `v(x′, xₙ) = u(x′, xₙ + η(x′))`.
pub fn transform_pullback(mesh: &Mesh, eta: &[f64], u: &[f64]) -> Result<Vec<f64>, NonlinearError> {
    shift(mesh, eta, u, 1.0)
}

/// `u = v ∘ θ⁻¹`, i.e. `u(x′, xₙ) = v(x′, xₙ − η(x′))`.
pub fn transform_pushforward(mesh: &Mesh, eta: &[f64], v: &[f64]) -> Result<Vec<f64>, NonlinearError> {
    shift(mesh, eta, v, -1.0)
}

/// Unit normal `(∇′η, −1)/√(1 + |∇′η|²)` on the tangential grid, one vector
/// component per entry.
pub fn normal_vector(spectral: &Spectral, n: usize, eta: &[f64]) -> Vec<Vec<f64>> {
    let grads: Vec<Vec<f64>> = (0..n - 1).map(|d| spectral.d_tangential(eta, d)).collect();
    let len = eta.len();
    let norm: Vec<f64> = (0..len)
        .map(|t| (1.0 + grads.iter().map(|g| g[t] * g[t]).sum::<f64>()).sqrt())
        .collect();
    let mut out: Vec<Vec<f64>> = grads.iter().map(|g| (0..len).map(|t| g[t] / norm[t]).collect()).collect();
    out.push(norm.iter().map(|r| -1.0 / r).collect());
    out
}
