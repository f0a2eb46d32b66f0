//! Extremal eigenvalue estimation for large sparse symmetric matrices and
//! 2-norm estimation via power iteration on `X^T X`. Access is matvec-only.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_REL_TOL: f64 = 1e-6;

/// Extreme eigenvalues `a = lambda_min`, `b = lambda_max` and the condition
/// number `kappa = a / b` of a symmetric asymptotically stable matrix.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Most negative eigenvalue.
    pub a: f64,
    /// Least negative eigenvalue.
    pub b: f64,
    /// `a / b`; >= 1 for stable symmetric matrices.
    pub kappa: f64,
    pub rel_tol: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Lanczos with full reorthogonalization. Stops when the residual bounds of
/// both extreme Ritz values fall below `rel_tol` relative to the values.
pub fn extreme_eigs(a: &BandedMatrix, rel_tol: f64) -> Result<SpectralSummary> {
    if !a.is_symmetric() {
        return Err(Error::SymmetryRequired);
    }
    if rel_tol <= 0.0 {
        return Err(Error::InvalidArgument("rel_tol must be positive".into()));
    }
    let dim = a.dim();
    let (lo, hi, iterations, converged) =
        lanczos_extremes(|v, y| a.matvec(v, y), dim, rel_tol)?;
    Ok(SpectralSummary {
        a: lo,
        b: hi,
        kappa: lo / hi,
        rel_tol,
        iterations,
        converged,
    })
}

/// Runs Lanczos on a symmetric operator, returning (min, max, iters, converged).
pub(crate) fn lanczos_extremes<F>(
    apply: F,
    dim: usize,
    rel_tol: f64,
) -> Result<(f64, f64, usize, bool)>
where
    F: Fn(&[f64], &mut [f64]),
{
    if dim == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if dim == 1 {
        let mut y = [0.0];
        apply(&[1.0], &mut y);
        return Ok((y[0], y[0], 1, true));
    }

    let max_steps = dim.min(600);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2b);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    normalize(&mut v);

    let mut basis: Vec<Vec<f64>> = vec![v.clone()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];

    let mut result = (0.0, 0.0, 0, false);
    for step in 0..max_steps {
        apply(&basis[step], &mut w);
        let alpha = dot(&w, &basis[step]);
        alphas.push(alpha);
        // full reorthogonalization keeps the Ritz extremes trustworthy
        for q in &basis {
            let c = dot(&w, q);
            axpy(&mut w, q, -c);
        }
        for q in &basis {
            let c = dot(&w, q);
            axpy(&mut w, q, -c);
        }
        let beta = norm(&w);

        let (lo, hi, res_lo, res_hi) = ritz_extremes(&alphas, &betas, beta);
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        result = (lo, hi, step + 1, false);
        if (res_lo <= rel_tol * scale && res_hi <= rel_tol * scale)
            || step + 1 == dim
        {
            result.3 = true;
            return Ok(result);
        }
        if beta < 1e-14 * scale {
            // invariant subspace found
            result.3 = true;
            return Ok(result);
        }
        betas.push(beta);
        let next: Vec<f64> = w.iter().map(|x| x / beta).collect();
        basis.push(next);
    }
    Ok(result)
}

/// Eigenvalue extremes of the Lanczos tridiagonal plus residual bounds
/// `beta_k * |last component of the Ritz vector|`.
fn ritz_extremes(alphas: &[f64], betas: &[f64], next_beta: f64) -> (f64, f64, f64, f64) {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for (i, &al) in alphas.iter().enumerate() {
        t[(i, i)] = al;
    }
    for (i, &be) in betas.iter().enumerate() {
        t[(i, i + 1)] = be;
        t[(i + 1, i)] = be;
    }
    let eig = SymmetricEigen::new(t);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let (mut res_lo, mut res_hi) = (f64::INFINITY, f64::INFINITY);
    for (idx, &val) in eig.eigenvalues.iter().enumerate() {
        let res = next_beta * eig.eigenvectors[(k - 1, idx)].abs();
        if val < lo {
            lo = val;
            res_lo = res;
        }
        if val > hi {
            hi = val;
            res_hi = res;
        }
    }
    (lo, hi, res_lo, res_hi)
}

/// 2-norm estimate by power iteration on `X^T X`. Returns 0 for the zero matrix.
pub fn norm2_est(x: &BandedMatrix, rel_tol: f64) -> f64 {
    let xt = x.transpose();
    norm2_power(
        |v, y| x.matvec(v, y),
        |v, y| xt.matvec(v, y),
        x.dim(),
        rel_tol,
    )
}

pub(crate) fn norm2_power<F, G>(apply: F, apply_t: G, dim: usize, rel_tol: f64) -> f64
where
    F: Fn(&[f64], &mut [f64]),
    G: Fn(&[f64], &mut [f64]),
{
    if dim == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x2b0b_cafe);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    normalize(&mut v);
    let mut w = vec![0.0; dim];
    let mut z = vec![0.0; dim];
    let mut sigma = 0.0f64;
    for _ in 0..5000 {
        apply(&v, &mut w);
        apply_t(&w, &mut z);
        let gamma = norm(&z);
        if gamma == 0.0 {
            return 0.0;
        }
        let new_sigma = gamma.sqrt();
        let done = (new_sigma - sigma).abs() <= rel_tol * new_sigma;
        sigma = new_sigma;
        for (vi, zi) in v.iter_mut().zip(&z) {
            *vi = zi / gamma;
        }
        if done {
            break;
        }
    }
    sigma
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], x: &[f64], c: f64) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    for x in v.iter_mut() {
        *x /= n;
    }
}
