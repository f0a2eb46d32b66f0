//! Banded approximation of `exp(t A)` by a shifted-scaled Chebyshev series
//! with numerical dropping applied inside the three-term recurrence.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::spectral::SpectralSummary;
use serde::{Deserialize, Serialize};

/// How to pick the truncation order of the series.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum ChebOrder {
    Fixed(usize),
    /// Smallest order whose tail bound drops below `tol`, capped at `max`.
    Auto { tol: f64, max: usize },
}

/// Per-call settings for the banded exponential.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChebSettings {
    pub order: ChebOrder,
    /// Quadrature node count for coefficient evaluation; `None` picks
    /// `max(2M, 64)`.
    pub nodes: Option<usize>,
    /// Drop bandwidth `d` (even); `None` disables dropping.
    pub drop_bandwidth: Option<usize>,
    /// Apply the projection on every `drop_period`-th recurrence step.
    pub drop_period: usize,
}

impl ChebSettings {
    pub fn fixed(m: usize, drop_bandwidth: Option<usize>) -> Self {
        ChebSettings {
            order: ChebOrder::Fixed(m),
            nodes: None,
            drop_bandwidth,
            drop_period: 1,
        }
    }
}

/// Description of a computed approximant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChebyshevApproximant {
    pub t: f64,
    pub order: usize,
    pub coeffs: Vec<f64>,
    pub nodes: usize,
    pub drop_bandwidth: Option<usize>,
    pub drop_period: usize,
    pub tail_bound: f64,
}

/// `A1 = (2/(b-a)) A - ((a+b)/(b-a)) I`; maps the spectrum into [-1, 1].
pub fn shift_scale(a_mat: &BandedMatrix, a: f64, b: f64) -> Result<BandedMatrix> {
    if a >= b {
        return Err(Error::InvalidArgument(format!(
            "spectral interval requires a < b, got a = {a}, b = {b}"
        )));
    }
    let id = BandedMatrix::identity(a_mat.dim());
    a_mat.add(&id, 2.0 / (b - a), -(a + b) / (b - a))
}

/// Chebyshev coefficients `c_1 .. c_{order+1}` of `exp(t z)` on `[a, b]`
/// (series degree `order`) via the cosine sum with `r` nodes:
/// `c_k = (2/R) sum_j f(cos theta_j) cos((k-1) theta_j)`.
pub fn cheb_coeffs(t: f64, a: f64, b: f64, order: usize, r: usize) -> Vec<f64> {
    let mut coeffs = vec![0.0; order + 1];
    for j in 1..=r {
        let theta = std::f64::consts::PI * (j as f64 - 0.5) / r as f64;
        let w = theta.cos();
        let f = (t / 2.0 * ((b - a) * w + a + b)).exp();
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c += f * ((k as f64) * theta).cos();
        }
    }
    for c in &mut coeffs {
        *c *= 2.0 / r as f64;
    }
    coeffs
}

pub fn default_nodes(order: usize) -> usize {
    (2 * order).max(64)
}

/// Numerical evaluation of the tail bound `sum_{k > M+1} |c_k|` for a
/// degree-`M` series: coefficients are extended until they drop below
/// 1e-16 or `M + 512` terms.
pub fn cheb_tail_bound(t: f64, a: f64, b: f64, order: usize) -> f64 {
    let mut k_max = order + 32;
    loop {
        let coeffs = cheb_coeffs(t, a, b, k_max, default_nodes(k_max));
        let small_enough = coeffs.last().is_some_and(|c| c.abs() < 1e-16);
        if small_enough || k_max >= order + 512 {
            return coeffs[order + 1..].iter().map(|c| c.abs()).sum();
        }
        k_max = (k_max * 2).min(order + 512);
    }
}

/// Smallest order with tail bound below `tol`, capped.
fn auto_order(t: f64, a: f64, b: f64, tol: f64, max: usize) -> usize {
    let mut order = 4;
    while order < max && cheb_tail_bound(t, a, b, order) > tol {
        order += (order / 2).max(2);
    }
    order.min(max)
}

/// Banded `exp(t A)` through the dropped Chebyshev recurrence
/// `T_{k+1} = D(2 A1 T_k - T_{k-1})`.
pub fn cheb_expm(
    a_mat: &BandedMatrix,
    t: f64,
    spec: &SpectralSummary,
    settings: &ChebSettings,
) -> Result<(BandedMatrix, ChebyshevApproximant)> {
    if !a_mat.is_symmetric() {
        return Err(Error::SymmetryRequired);
    }
    if t < 0.0 {
        return Err(Error::InvalidArgument("t must be nonnegative".into()));
    }
    if settings.drop_period == 0 {
        return Err(Error::InvalidArgument("drop_period must be >= 1".into()));
    }
    let (a, b) = (spec.a, spec.b);
    // order is the series degree; the sum carries order + 1 coefficients
    let order = match settings.order {
        ChebOrder::Fixed(m) => m.max(1),
        ChebOrder::Auto { tol, max } => auto_order(t, a, b, tol, max),
    };
    let nodes = settings.nodes.unwrap_or_else(|| default_nodes(order));
    let coeffs = cheb_coeffs(t, a, b, order, nodes);
    let tail_bound = cheb_tail_bound(t, a, b, order);

    let a1 = shift_scale(a_mat, a, b)?;
    let dim = a_mat.dim();
    let mut t_prev = BandedMatrix::identity(dim); // T_1
    let mut t_cur = a1.clone(); // T_2

    // f = c_1/2 I + sum_{k>=2} c_k T_k
    let mut acc = t_prev.scale(coeffs[0] / 2.0);
    acc = acc.add(&t_cur, 1.0, coeffs[1])?;

    let guard = 1e6 * t_cur.frobenius_norm().max(1.0);
    for k in 2..=order {
        let mut next = a1.mul(&t_cur)?.add(&t_prev, 2.0, -1.0)?;
        if let Some(d) = settings.drop_bandwidth {
            if (k - 1) % settings.drop_period == 0 {
                next = next.project_band(d)?;
            }
        }
        if next.frobenius_norm() > guard {
            return Err(Error::RecurrenceDiverged { step: k });
        }
        acc = acc.add(&next, 1.0, coeffs[k])?;
        t_prev = t_cur;
        t_cur = next;
    }

    if let Some(d) = settings.drop_bandwidth {
        if settings.drop_period > 1 {
            acc = acc.project_band(d)?;
        }
    }
    // A1 is symmetric, so every T_k is; enforce the flag exactly
    let result = acc.symmetrize();

    Ok((
        result,
        ChebyshevApproximant {
            t,
            order,
            coeffs,
            nodes,
            drop_bandwidth: settings.drop_bandwidth,
            drop_period: settings.drop_period,
            tail_bound,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::gen_heat2d;
    use crate::oracle;
    use crate::spectral::extreme_eigs;

    #[test]
    fn shift_scale_endpoints() {
        let (a, b) = (-5.0, -1.0);
        let m = BandedMatrix::diagonal(&[a, b]);
        let a1 = shift_scale(&m, a, b).unwrap();
        assert!((a1.get(0, 0) + 1.0).abs() < 1e-14);
        assert!((a1.get(1, 1) - 1.0).abs() < 1e-14);

        let mid = BandedMatrix::diagonal(&[(a + b) / 2.0; 3]);
        let z = shift_scale(&mid, a, b).unwrap();
        assert!(z.iter().all(|(_, _, v)| v.abs() < 1e-14));

        assert!(shift_scale(&m, -1.0, -1.0).is_err());
    }

    #[test]
    fn shift_scale_spectrum_in_unit_interval() {
        let m = gen_heat2d(10).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let a1 = shift_scale(&m.a, spec.a, spec.b).unwrap();
        let eig = nalgebra::SymmetricEigen::new(a1.to_dense());
        for &l in eig.eigenvalues.iter() {
            assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&l), "lambda = {l}");
        }
    }

    #[test]
    fn coeffs_at_t_zero_are_identity_series() {
        let c = cheb_coeffs(0.0, -5.0, -1.0, 8, 64);
        assert!((c[0] - 2.0).abs() < 1e-14);
        for &ck in &c[1..] {
            assert!(ck.abs() < 1e-14);
        }
        // the extended-coefficient sum carries accumulated cosine-sum noise
        assert!(cheb_tail_bound(0.0, -5.0, -1.0, 8) < 1e-12);
    }

    #[test]
    fn coefficient_tail_reported_value() {
        // 2D heat, N = 100, t = 1, M = 7: tail near 4.4e-7
        let m = gen_heat2d(100).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let tail = cheb_tail_bound(1.0, spec.a, spec.b, 7);
        assert!(
            (4.4e-8..=4.4e-6).contains(&tail),
            "tail bound {tail:.3e} outside one order of magnitude of 4.4e-7"
        );
    }

    #[test]
    fn slower_decay_for_larger_t() {
        let m = gen_heat2d(20).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let tail1 = cheb_tail_bound(1.0, spec.a, spec.b, 7);
        let tail2 = cheb_tail_bound(2.0, spec.a, spec.b, 7);
        assert!(tail2 > tail1);
    }

    #[test]
    fn coefficients_converged_in_node_count() {
        let m = gen_heat2d(20).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let order = 12;
        let r = default_nodes(order);
        let c1 = cheb_coeffs(1.0, spec.a, spec.b, order, r);
        let c2 = cheb_coeffs(1.0, spec.a, spec.b, order, 2 * r);
        for (a, b) in c1.iter().zip(&c2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn expm_at_t_zero_is_identity() {
        let m = gen_heat2d(5).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let (e, _) = cheb_expm(&m.a, 0.0, &spec, &ChebSettings::fixed(7, None)).unwrap();
        let diff = e.to_dense() - nalgebra::DMatrix::identity(30, 30);
        assert!(diff.norm() < 1e-13);
    }

    #[test]
    fn recurrence_matches_dense_polynomials() {
        let m = gen_heat2d(6).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let a1 = shift_scale(&m.a, spec.a, spec.b).unwrap().to_dense();
        let dim = a1.nrows();

        // dense three-term recurrence
        let mut tk_prev = nalgebra::DMatrix::identity(dim, dim);
        let mut tk = a1.clone();
        let coeffs = cheb_coeffs(1.0, spec.a, spec.b, 10, 64);
        let mut dense_sum = nalgebra::DMatrix::identity(dim, dim) * (coeffs[0] / 2.0)
            + &tk * coeffs[1];
        for c in coeffs.iter().skip(2) {
            let next = 2.0 * &a1 * &tk - tk_prev;
            dense_sum += &next * *c;
            tk_prev = tk;
            tk = next;
        }

        let (e, _) = cheb_expm(&m.a, 1.0, &spec, &ChebSettings::fixed(10, None)).unwrap();
        let rel = (e.to_dense() - &dense_sum).norm() / dense_sum.norm();
        assert!(rel < 1e-10, "rel = {rel:.3e}");
    }

    #[test]
    fn no_dropping_matches_dense_expm() {
        let m = gen_heat2d(100).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let (e, app) = cheb_expm(&m.a, 1.0, &spec, &ChebSettings::fixed(7, None)).unwrap();
        let truth = oracle::dense_expm(&m.a.to_dense(), 1.0).unwrap();
        let err = oracle::dense_norm2(&(e.to_dense() - truth), 1e-9);
        assert!(
            (4.4e-8..=4.4e-6).contains(&err),
            "2-norm error {err:.3e} outside expected window"
        );
        assert!(app.tail_bound >= err, "tail bound must dominate the error");
    }

    #[test]
    fn dropping_keeps_bandwidth_and_accuracy() {
        let m = gen_heat2d(50).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let settings = ChebSettings::fixed(20, Some(140));
        let (e, app) = cheb_expm(&m.a, 1.0, &spec, &settings).unwrap();
        assert!(e.max_offset().unwrap() <= 70);
        let truth = oracle::dense_expm(&m.a.to_dense(), 1.0).unwrap();
        let err = oracle::dense_norm2(&(e.to_dense() - truth), 1e-9);
        assert!(err <= app.tail_bound.max(1e-4), "err = {err:.3e}");
    }

    #[test]
    fn result_is_symmetric() {
        let m = gen_heat2d(8).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let (e, _) = cheb_expm(&m.a, 0.7, &spec, &ChebSettings::fixed(9, Some(10))).unwrap();
        assert!(e.is_symmetric());
        assert!(e.asymmetry() < 1e-13);
    }
}
