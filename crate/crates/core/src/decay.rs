//! A priori decay bounds for the Lyapunov solution of banded symmetric
//! stable `A`, plus empirical decay profiles for checking how conservative
//! the bounds are in practice.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::spectral::SpectralSummary;
use serde::{Deserialize, Serialize};

/// Exponential off-diagonal envelope `|entry at distance k| <= tau * rho^k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub tau: f64,
    pub rho: f64,
    /// Bandwidth the distance `k` is measured against (matrix indices for
    /// the diagonal-P bound, vec indices for the Kronecker bound).
    pub bandwidth: usize,
    pub kappa: f64,
}

fn check_stable(spec: &SpectralSummary) -> Result<()> {
    if spec.b >= 0.0 || spec.a >= spec.b {
        return Err(Error::InvalidArgument(format!(
            "decay bounds require a stable spectrum, got [{}, {}]",
            spec.a, spec.b
        )));
    }
    Ok(())
}

fn rho_for(kappa: f64, bandwidth: usize) -> f64 {
    let sq = kappa.sqrt();
    ((sq - 1.0) / (sq + 1.0)).powf(2.0 / bandwidth as f64)
}

/// `K1 = (1 + sqrt(kappa))^2 / (2 kappa)`, the constant of the banded
/// inverse bound.
pub fn k1(kappa: f64) -> f64 {
    let sq = kappa.sqrt();
    (1.0 + sq).powi(2) / (2.0 * kappa)
}

/// Decay envelope of `X` for `P = gamma I`: then `X = (gamma/2) A^{-1}` and
/// `|X_ij| <= tau * rho^{|i-j|}` with `tau = (|gamma|/2) K1 / |b|` and
/// `rho = ((sqrt(kappa)-1)/(sqrt(kappa)+1))^{2/m}` for `m`-banded `A`.
pub fn decay_diag_p(gamma: f64, spec: &SpectralSummary, m: usize) -> Result<DecayEstimate> {
    check_stable(spec)?;
    if m == 0 || m % 2 != 0 {
        return Err(Error::OddBandwidth(m));
    }
    Ok(DecayEstimate {
        tau: 0.5 * gamma.abs() * k1(spec.kappa) / spec.b.abs(),
        rho: rho_for(spec.kappa, m),
        bandwidth: m,
        kappa: spec.kappa,
    })
}

/// Decay envelope of the inverse Kronecker sum: the operator
/// `I (x) A + A (x) I` has spectrum `[2a, 2b]`, the same condition number,
/// and bandwidth `m1 = dim * m` in vec indices, giving
/// `|(inverse)_st| <= tau1 * rho1^{|s-t|}` with `tau1 = K1 / (2|b|)`.
pub fn decay_kron(spec: &SpectralSummary, m: usize, dim: usize) -> Result<DecayEstimate> {
    check_stable(spec)?;
    if m == 0 || m % 2 != 0 {
        return Err(Error::OddBandwidth(m));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("dim must be positive".into()));
    }
    let m1 = dim * m;
    Ok(DecayEstimate {
        tau: k1(spec.kappa) / (2.0 * spec.b.abs()),
        rho: rho_for(spec.kappa, m1),
        bandwidth: m1,
        kappa: spec.kappa,
    })
}

/// Entrywise bound on `vec(X)` for general symmetric banded `P`:
/// `|vec(X)_s| <= tau1 * sum_t rho1^{|s-t|} |vec(P)_t|`, where `t` runs over
/// the structural entries of `P`, `est` comes from [`decay_kron`], and the
/// vec position of `(i, j)` is `j * dim + i` (0-based).
pub fn theorem1_bound(p: &BandedMatrix, est: &DecayEstimate, s: usize) -> Result<f64> {
    let dim = p.dim();
    if s >= dim * dim {
        return Err(Error::IndexOutOfRange { i: s, j: 0, dim: dim * dim });
    }
    let mut sum = 0.0;
    for (i, j, v) in p.iter() {
        let t = j * dim + i;
        sum += est.rho.powi(s.abs_diff(t) as i32) * v.abs();
    }
    Ok(est.tau * sum)
}

/// Largest magnitude per off-diagonal distance: `profile[k] = max |X_ij|`
/// over `|i - j| = k`.
pub fn empirical_decay(x: &BandedMatrix) -> Vec<f64> {
    let width = match x.max_offset() {
        Some(w) => w + 1,
        None => return Vec::new(),
    };
    let mut profile = vec![0.0f64; width];
    for (i, j, v) in x.iter() {
        let k = i.abs_diff(j);
        profile[k] = profile[k].max(v.abs());
    }
    profile
}

/// Least-squares fit of `log(profile[k]) ~ log(tau) + k log(rho)`; returns
/// `(tau, rho)`. Zero entries are skipped; at least two positive entries
/// are required.
pub fn fit_decay_rate(profile: &[f64]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = profile
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v > 0.0)
        .map(|(k, &v)| (k as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two positive profile entries".into(),
        ));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok((intercept.exp(), slope.exp()))
}
