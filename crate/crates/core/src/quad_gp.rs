//! Method 2: quadrature of the integral representation
//! `X = -int_0^inf exp(tA) P exp(tA) dt` with banded exponentials, followed
//! by gradient projection refinement of the banded iterate.

use crate::banded::{BandedMatrix, SparsityPattern};
use crate::cheb::{cheb_expm, ChebSettings, ChebyshevApproximant};
use crate::error::{Error, Result};
use crate::report::SolveReport;
use crate::spectral::SpectralSummary;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// One quadrature node: index, weight, and abscissa before the `psi` scaling.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadNode {
    pub j: i64,
    pub omega: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub q: usize,
    pub psi: f64,
    pub eps1: f64,
    /// `2q + 1` nodes in ascending `j`.
    pub nodes: Vec<QuadNode>,
}

/// Exponentially convergent rule for `int_0^inf`:
/// `omega_j = (q + q exp(-2j/sqrt(q)))^{-1/2}`, `t_j = asinh(exp(j/sqrt(q)))`,
/// scaled by `psi = 3 / (2 |b + eps1|)` so the integrand decay matches the
/// spectrum. `b` is the largest (least negative) eigenvalue.
pub fn quad_rule(q: usize, b: f64, eps1: f64) -> Result<QuadratureRule> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be >= 1".into()));
    }
    if b + eps1 >= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rule requires a stable spectrum, got b + eps1 = {}",
            b + eps1
        )));
    }
    let psi = 3.0 / (2.0 * (b + eps1).abs());
    let qf = q as f64;
    let nodes = (-(q as i64)..=q as i64)
        .map(|j| {
            let x = j as f64 / qf.sqrt();
            QuadNode {
                j,
                omega: (qf + qf * (-2.0 * x).exp()).powf(-0.5),
                t: x.exp().asinh(),
            }
        })
        .collect();
    Ok(QuadratureRule {
        q,
        psi,
        eps1,
        nodes,
    })
}

/// Quadrature approximation `X = -sum_j psi omega_j F_j P F_j` with
/// `F_j = exp(psi t_j A)` computed by the banded Chebyshev exponential.
/// Nodes are summed in ascending `j` so results are reproducible.
pub fn quad_lyap(
    a: &BandedMatrix,
    p: &BandedMatrix,
    spec: &SpectralSummary,
    rule: &QuadratureRule,
    cheb: &ChebSettings,
) -> Result<(BandedMatrix, Vec<ChebyshevApproximant>)> {
    if !a.is_symmetric() || !p.is_symmetric() {
        return Err(Error::SymmetryRequired);
    }
    if a.dim() != p.dim() {
        return Err(Error::DimensionMismatch(a.dim(), p.dim()));
    }
    let mut acc: Option<BandedMatrix> = None;
    let mut approximants = Vec::with_capacity(rule.nodes.len());
    for node in &rule.nodes {
        let t_scaled = rule.psi * node.t;
        let (f, app) = cheb_expm(a, t_scaled, spec, cheb).map_err(|e| Error::QuadratureNode {
            node: node.j,
            source: Box::new(e),
        })?;
        approximants.push(app);
        let term = f.mul(p)?.mul(&f)?;
        let weight = -rule.psi * node.omega;
        acc = Some(match acc {
            None => term.scale(weight),
            Some(s) => s.add(&term, 1.0, weight)?,
        });
    }
    let x = acc.expect("rule always has at least one node").symmetrize();
    Ok((x, approximants))
}

/// Residual `R = P - A X - X A`.
pub fn gp_residual(a: &BandedMatrix, p: &BandedMatrix, x: &BandedMatrix) -> Result<BandedMatrix> {
    let ax = a.mul(x)?;
    let xa = x.mul(a)?;
    p.add(&ax.add(&xa, 1.0, 1.0)?, 1.0, -1.0)
}

/// Gradient of `F1(X) = |P - A X - X A|_F^2` for symmetric `A`:
/// `G = -2 (A R + R A)`.
pub fn gp_gradient(a: &BandedMatrix, residual: &BandedMatrix) -> Result<BandedMatrix> {
    let ar = a.mul(residual)?;
    let ra = residual.mul(a)?;
    Ok(ar.add(&ra, 1.0, 1.0)?.scale(-2.0))
}

/// Feasible set of the projected iteration.
#[derive(Debug, Clone)]
pub enum GpProjection {
    /// Matrices of bandwidth at most `d` (even).
    Band(usize),
    /// Matrices supported on a fixed pattern.
    Pattern(SparsityPattern),
}

impl GpProjection {
    fn apply(&self, x: &BandedMatrix) -> Result<BandedMatrix> {
        match self {
            GpProjection::Band(d) => x.project_band(*d),
            GpProjection::Pattern(s) => x.project_pattern(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GradientProjectionConfig {
    pub projection: GpProjection,
    /// Armijo sufficient-decrease parameter.
    pub sigma: f64,
    /// Step contraction factor.
    pub zeta: f64,
    /// Initial step along the projection arc.
    pub delta_bar: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    /// Stop early when the relative decrease of `F1` drops below this.
    pub rel_decrease_tol: f64,
}

impl GradientProjectionConfig {
    /// Default configuration: `sigma = 1e-4`, `zeta = 0.5`, 50 iterations,
    /// and an initial step `10 / (8 a^2)` scaled from the most negative
    /// eigenvalue `a`.
    pub fn defaults(projection: GpProjection, spec: &SpectralSummary) -> Self {
        GradientProjectionConfig {
            projection,
            sigma: 1e-4,
            zeta: 0.5,
            delta_bar: 10.0 / (8.0 * spec.a * spec.a),
            max_iter: 50,
            max_backtracks: 60,
            rel_decrease_tol: 1e-12,
        }
    }
}

/// Gradient projection with Armijo backtracking along the projection arc:
/// trial iterates are `X(delta) = D(X - delta G)` and a step is accepted
/// when `F1(X) - F1(X(delta)) >= sigma <G, X - X(delta)>_F`. `F1` never
/// increases across accepted steps. The report history records `F1` at
/// every iterate, starting with the projected initial guess.
pub fn gp_refine(
    a: &BandedMatrix,
    p: &BandedMatrix,
    x0: &BandedMatrix,
    cfg: &GradientProjectionConfig,
) -> Result<(BandedMatrix, SolveReport)> {
    if !a.is_symmetric() || !p.is_symmetric() {
        return Err(Error::SymmetryRequired);
    }
    if a.dim() != p.dim() || a.dim() != x0.dim() {
        return Err(Error::DimensionMismatch(a.dim(), x0.dim()));
    }
    if !(cfg.sigma > 0.0 && cfg.sigma < 1.0) || !(cfg.zeta > 0.0 && cfg.zeta < 1.0) {
        return Err(Error::InvalidArgument(
            "sigma and zeta must lie in (0, 1)".into(),
        ));
    }
    if cfg.delta_bar <= 0.0 {
        return Err(Error::InvalidArgument("delta_bar must be positive".into()));
    }
    let start = Instant::now();
    let mut report = SolveReport::new(
        "gradient-projection",
        serde_json::json!({
            "sigma": cfg.sigma,
            "zeta": cfg.zeta,
            "delta_bar": cfg.delta_bar,
            "max_iter": cfg.max_iter,
            "max_backtracks": cfg.max_backtracks,
            "rel_decrease_tol": cfg.rel_decrease_tol,
        }),
    );

    let mut x = cfg.projection.apply(&x0.symmetrize())?;
    let mut peak_nnz = x.nnz();
    let mut f1 = gp_residual(a, p, &x)?.frobenius_norm().powi(2);
    report.history.push(f1);

    // below this the residual is rounding noise; iterating further only
    // chases machine-epsilon fluctuations
    let f1_floor = (1e-13 * p.frobenius_norm()).powi(2);
    if f1 <= f1_floor {
        report.converged = true;
    }

    for _ in 0..cfg.max_iter {
        if report.converged {
            break;
        }
        let residual = gp_residual(a, p, &x)?;
        let grad = gp_gradient(a, &residual)?;
        peak_nnz = peak_nnz.max(grad.nnz());

        let mut accepted = None;
        let mut delta = cfg.delta_bar;
        for _ in 0..cfg.max_backtracks {
            let trial = cfg.projection.apply(&x.add(&grad, 1.0, -delta)?)?;
            let f1_trial = gp_residual(a, p, &trial)?.frobenius_norm().powi(2);
            // <G, X - X(delta)>_F, exact on the overlap of the patterns
            let step = x.add(&trial, 1.0, -1.0)?;
            let descent = grad.frobenius_inner(&step)?;
            if f1 - f1_trial >= cfg.sigma * descent {
                accepted = Some((trial, f1_trial));
                break;
            }
            delta *= cfg.zeta;
        }
        let Some((trial, f1_trial)) = accepted else {
            report.flags.push("backtracking exhausted".into());
            break;
        };
        let prev = f1;
        x = trial;
        f1 = f1_trial;
        report.history.push(f1);
        if f1 <= f1_floor || prev - f1 <= cfg.rel_decrease_tol * prev.max(f64::MIN_POSITIVE) {
            report.converged = true;
        }
    }
    if report.history.len() == cfg.max_iter + 1 {
        report.converged = true;
    }
    let x = x.symmetrize();
    report.wall_seconds = start.elapsed().as_secs_f64();
    report.peak_nnz = peak_nnz;
    report.final_nnz = x.nnz();
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::ChebOrder;
    use crate::models::gen_heat2d;
    use crate::oracle;
    use crate::spectral::extreme_eigs;

    #[test]
    fn rule_reference_values() {
        let rule = quad_rule(1, -1.0, 0.0).unwrap();
        assert_eq!(rule.nodes.len(), 3);
        assert!((rule.psi - 1.5).abs() < 1e-15);
        let mid = rule.nodes[1];
        assert_eq!(mid.j, 0);
        assert!((mid.omega - (2.0f64).powf(-0.5)).abs() < 1e-15);
        assert!((mid.t - (1.0 + 2.0f64.sqrt()).ln()).abs() < 1e-15);
        // ascending j
        assert!(rule.nodes.windows(2).all(|w| w[0].j < w[1].j));
        assert!(quad_rule(0, -1.0, 0.0).is_err());
        assert!(quad_rule(4, 0.0, 0.0).is_err());
    }

    #[test]
    fn weights_decay_for_negative_j() {
        let rule = quad_rule(20, -0.5, 0.0).unwrap();
        // omega_j shrinks as j -> -q, t_j shrinks to 0
        assert!(rule.nodes[0].omega < 0.05 * rule.nodes[20].omega);
        assert!(rule.nodes[0].t < rule.nodes[20].t);
        assert!(rule.nodes.last().unwrap().t > rule.nodes[20].t);
    }

    fn auto_cheb(tol: f64) -> ChebSettings {
        ChebSettings {
            order: ChebOrder::Auto { tol, max: 600 },
            nodes: None,
            drop_bandwidth: None,
            drop_period: 1,
        }
    }

    #[test]
    fn quadrature_converges_to_dense_solution() {
        let m = gen_heat2d(4).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let truth = oracle::dense_lyap(&m.a.to_dense(), &m.p.to_dense()).unwrap();

        // the truncation error of the rule decays like exp(-sqrt(q))
        let mut last_err = f64::INFINITY;
        for q in [10, 40, 160] {
            let rule = quad_rule(q, spec.b, 0.0).unwrap();
            let (x, _) = quad_lyap(&m.a, &m.p, &spec, &rule, &auto_cheb(1e-10)).unwrap();
            let err = oracle::accuracy(&x.to_dense(), &truth).unwrap();
            assert!(err < last_err, "q = {q}: {err:.3e} !< {last_err:.3e}");
            last_err = err;
        }
        assert!(last_err < 2e-4, "q = 160 error {last_err:.3e}");
    }

    #[test]
    fn residual_and_gradient_identities() {
        let m = gen_heat2d(4).unwrap();
        let truth = oracle::dense_lyap(&m.a.to_dense(), &m.p.to_dense()).unwrap();
        let x = BandedMatrix::from_dense(&truth).symmetrize();
        let r = gp_residual(&m.a, &m.p, &x).unwrap();
        assert!(r.frobenius_norm() < 1e-10 * m.p.frobenius_norm());

        // finite-difference check of the gradient
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let x0 = m.p.scale(0.3); // any symmetric point works
        let f1 = |x: &BandedMatrix| {
            gp_residual(&m.a, &m.p, x)
                .unwrap()
                .frobenius_norm()
                .powi(2)
        };
        let g = gp_gradient(&m.a, &gp_residual(&m.a, &m.p, &x0).unwrap()).unwrap();
        let dir = {
            let vals: Vec<f64> = (0..m.p.nnz()).map(|_| rng.gen::<f64>() - 0.5).collect();
            BandedMatrix::from_pattern_values(&m.p.pattern(), &vals).symmetrize()
        };
        let h = 1e-6;
        let fd = (f1(&x0.add(&dir, 1.0, h).unwrap()) - f1(&x0.add(&dir, 1.0, -h).unwrap()))
            / (2.0 * h);
        let inner = g.frobenius_inner(&dir).unwrap();
        assert!(
            (fd - inner).abs() < 1e-5 * inner.abs().max(1.0),
            "fd = {fd}, <G, D> = {inner}"
        );
    }

    #[test]
    fn refinement_decreases_objective() {
        let m = gen_heat2d(6).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let rule = quad_rule(20, spec.b, 0.0).unwrap();
        let cheb = ChebSettings {
            order: ChebOrder::Auto {
                tol: 1e-8,
                max: 400,
            },
            nodes: None,
            drop_bandwidth: Some(20),
            drop_period: 1,
        };
        let (x0, _) = quad_lyap(&m.a, &m.p, &spec, &rule, &cheb).unwrap();
        let cfg = GradientProjectionConfig::defaults(GpProjection::Band(20), &spec);
        let (x, report) = gp_refine(&m.a, &m.p, &x0, &cfg).unwrap();
        assert!(report.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(
            *report.history.last().unwrap() < report.history[0],
            "history: {:?}",
            report.history
        );
        assert!(x.max_offset().unwrap() <= 10);
        assert!(x.is_symmetric());
    }

    #[test]
    fn refinement_improves_perturbed_truth() {
        use rand::{Rng, SeedableRng};
        let m = gen_heat2d(6).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let truth = oracle::dense_lyap(&m.a.to_dense(), &m.p.to_dense()).unwrap();
        let band = 2 * (m.a.dim() - 1); // full band: the optimum is the truth
        let x_proj = BandedMatrix::from_dense(&truth);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let noise_vals: Vec<f64> = (0..x_proj.nnz()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let noise =
            BandedMatrix::from_pattern_values(&x_proj.pattern(), &noise_vals).symmetrize();
        let scale = 0.1 * x_proj.frobenius_norm() / noise.frobenius_norm();
        let x0 = x_proj.add(&noise, 1.0, scale).unwrap();

        let mut cfg = GradientProjectionConfig::defaults(GpProjection::Band(band), &spec);
        cfg.max_iter = 200;
        let (x, report) = gp_refine(&m.a, &m.p, &x0, &cfg).unwrap();
        assert!(report.history.windows(2).all(|w| w[1] <= w[0]));
        let before = oracle::accuracy(&x0.to_dense(), &truth).unwrap();
        let after = oracle::accuracy(&x.to_dense(), &truth).unwrap();
        assert!(after < 0.2 * before, "{after:.3e} !< 0.2 * {before:.3e}");
    }

    #[test]
    fn refinement_stops_at_exact_solution() {
        let m = gen_heat2d(4).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let truth = oracle::dense_lyap(&m.a.to_dense(), &m.p.to_dense()).unwrap();
        let x0 = BandedMatrix::from_dense(&truth);
        let d_full = 2 * (m.a.dim() - 1);
        let cfg = GradientProjectionConfig::defaults(GpProjection::Band(d_full), &spec);
        let (_, report) = gp_refine(&m.a, &m.p, &x0, &cfg).unwrap();
        assert!(report.converged);
        assert!(report.history.len() <= 3, "history: {:?}", report.history);
    }

    #[test]
    fn pattern_projection_restricts_support() {
        let m = gen_heat2d(5).unwrap();
        let spec = extreme_eigs(&m.a, 1e-10).unwrap();
        let s = crate::pattern::predict_pattern(&m.a, &m.p, 2).unwrap();
        let x0 = m.p.scale(-0.5);
        let cfg = GradientProjectionConfig::defaults(GpProjection::Pattern(s.clone()), &spec);
        let (x, report) = gp_refine(&m.a, &m.p, &x0, &cfg).unwrap();
        assert!(x.pattern().is_subset_of(&s));
        assert!(report.history.last().unwrap() <= &report.history[0]);
    }
}
