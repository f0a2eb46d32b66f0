//! Method 1: approximate the Lyapunov solution on a fixed sparsity pattern
//! by solving the pattern-restricted least-squares problem with CGLS,
//! matrix-free. The reduced operator is never assembled: its action is one
//! application of the Lyapunov map `X -> A X + X A` restricted to the
//! reachable row pattern, and the adjoint is the same map restricted back
//! to the solution pattern (`A` symmetric).

use crate::banded::{BandedMatrix, SparsityPattern};
use crate::error::{Error, Result};
use crate::pattern::{row_reach, PatternConfig};
use crate::report::SolveReport;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::time::Instant;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CglsConfig {
    /// Stop when the normal-equation residual ratio eta drops below this.
    pub eta_tol: f64,
    pub max_iter: usize,
    pub pattern: PatternConfig,
}

impl CglsConfig {
    pub fn new(pattern: PatternConfig) -> Self {
        CglsConfig {
            eta_tol: 1e-6,
            max_iter: 10_000,
            pattern,
        }
    }
}

/// Packs matrix values on a fixed pattern into a flat vector and back.
pub struct PatternMap<'a> {
    pattern: &'a SparsityPattern,
}

impl<'a> PatternMap<'a> {
    pub fn new(pattern: &'a SparsityPattern) -> Self {
        PatternMap { pattern }
    }

    pub fn len(&self) -> usize {
        self.pattern.nnz()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Values of `x` on the pattern, row-major; entries of the pattern not
    /// structural in `x` read as zero.
    pub fn extract(&self, x: &BandedMatrix) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.pattern.dim() {
            for &j in self.pattern.row(i) {
                out.push(x.get(i, j));
            }
        }
        out
    }

    pub fn assemble(&self, values: &[f64]) -> BandedMatrix {
        BandedMatrix::from_pattern_values(self.pattern, values)
    }
}

/// The restricted Lyapunov operator and its adjoint, matrix-free.
pub struct RestrictedLyapOp<'a> {
    a: &'a BandedMatrix,
    pub solution_pattern: &'a SparsityPattern,
    pub row_pattern: &'a SparsityPattern,
    peak_nnz: Cell<usize>,
}

impl<'a> RestrictedLyapOp<'a> {
    pub fn new(
        a: &'a BandedMatrix,
        solution_pattern: &'a SparsityPattern,
        row_pattern: &'a SparsityPattern,
    ) -> Result<Self> {
        if a.dim() != solution_pattern.dim() {
            return Err(Error::DimensionMismatch(a.dim(), solution_pattern.dim()));
        }
        if a.dim() != row_pattern.dim() {
            return Err(Error::DimensionMismatch(a.dim(), row_pattern.dim()));
        }
        Ok(RestrictedLyapOp {
            a,
            solution_pattern,
            row_pattern,
            peak_nnz: Cell::new(0),
        })
    }

    fn lyap_apply(&self, x: &BandedMatrix) -> Result<BandedMatrix> {
        let y = self.a.mul(x)?.add(&x.mul(self.a)?, 1.0, 1.0)?;
        self.peak_nnz.set(self.peak_nnz.get().max(y.nnz()));
        Ok(y)
    }

    /// `y = A_tilde_2 x`: values of `A X + X A` on the row pattern, where
    /// `X` carries `x` on the solution pattern.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let xm = PatternMap::new(self.solution_pattern).assemble(x);
        let y = self.lyap_apply(&xm)?;
        Ok(PatternMap::new(self.row_pattern).extract(&y))
    }

    /// `z = A_tilde_2^T y` (A symmetric): the same map restricted to the
    /// solution pattern.
    pub fn adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        let ym = PatternMap::new(self.row_pattern).assemble(y);
        let z = self.lyap_apply(&ym)?;
        Ok(PatternMap::new(self.solution_pattern).extract(&z))
    }

    pub fn peak_nnz(&self) -> usize {
        self.peak_nnz.get()
    }
}

/// Forward map `y = A_tilde_2 x` without forming the Kronecker operator.
pub fn lyap_op_restricted(
    a: &BandedMatrix,
    x: &[f64],
    s: &SparsityPattern,
    r: &SparsityPattern,
) -> Result<Vec<f64>> {
    RestrictedLyapOp::new(a, s, r)?.forward(x)
}

/// Adjoint map `z = A_tilde_2^T y`.
pub fn lyap_op_adjoint(
    a: &BandedMatrix,
    y: &[f64],
    r: &SparsityPattern,
    s: &SparsityPattern,
) -> Result<Vec<f64>> {
    RestrictedLyapOp::new(a, s, r)?.adjoint(y)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Classical two-recurrence CGLS on `min |p2 - A_tilde_2 x|^2` with zero
/// initial guess, stopped on the eta criterion.
pub fn cgls_solve(
    a: &BandedMatrix,
    p: &BandedMatrix,
    cfg: &CglsConfig,
) -> Result<(BandedMatrix, SolveReport)> {
    if !a.is_symmetric() || !p.is_symmetric() {
        return Err(Error::SymmetryRequired);
    }
    if a.dim() != p.dim() {
        return Err(Error::DimensionMismatch(a.dim(), p.dim()));
    }
    let start = Instant::now();
    let s = cfg.pattern.build(a, p)?;
    let r = row_reach(a, &s)?;
    let op = RestrictedLyapOp::new(a, &s, &r)?;
    let smap = PatternMap::new(&s);
    let rmap = PatternMap::new(&r);

    let mut report = SolveReport::new(
        "cgls",
        serde_json::json!({
            "eta_tol": cfg.eta_tol,
            "max_iter": cfg.max_iter,
            "pattern": cfg.pattern,
            "n1": smap.len(),
            "n2": rmap.len(),
            "preconditioner": "identity",
        }),
    );

    let b = rmap.extract(p);
    let mut x = vec![0.0; smap.len()];
    let mut resid = b;
    let mut grad = op.adjoint(&resid)?;
    let s0_norm = norm2(&grad);
    if s0_norm == 0.0 {
        // P restricted to the row pattern is already unreachable or zero
        report.converged = true;
        report.flags.push("zero initial gradient".into());
        report.wall_seconds = start.elapsed().as_secs_f64();
        let xm = smap.assemble(&x).symmetrize();
        report.final_nnz = xm.nnz();
        return Ok((xm, report));
    }
    let mut dir = grad.clone();
    let mut gamma: f64 = grad.iter().map(|g| g * g).sum();

    for _ in 0..cfg.max_iter {
        let q = op.forward(&dir)?;
        let qn: f64 = q.iter().map(|v| v * v).sum();
        if qn == 0.0 {
            report.flags.push("breakdown: zero search direction image".into());
            break;
        }
        let alpha = gamma / qn;
        for (xi, di) in x.iter_mut().zip(&dir) {
            *xi += alpha * di;
        }
        for (ri, qi) in resid.iter_mut().zip(&q) {
            *ri -= alpha * qi;
        }
        grad = op.adjoint(&resid)?;
        let gamma_new: f64 = grad.iter().map(|g| g * g).sum();
        let eta = gamma_new.sqrt() / s0_norm;
        report.history.push(eta);
        if eta <= cfg.eta_tol {
            report.converged = true;
            break;
        }
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        for (di, gi) in dir.iter_mut().zip(&grad) {
            *di = gi + beta * *di;
        }
    }

    let xm = smap.assemble(&x);
    let asym = xm.asymmetry();
    if asym > 1e-12 * xm.frobenius_norm() {
        report
            .flags
            .push(format!("iterate asymmetry {asym:.3e} above guard"));
    }
    let xm = xm.symmetrize();
    report.wall_seconds = start.elapsed().as_secs_f64();
    report.peak_nnz = op.peak_nnz().max(smap.len() + rmap.len());
    report.final_nnz = xm.nnz();
    Ok((xm, report))
}
