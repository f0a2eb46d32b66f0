//! A priori sparsity patterns for the approximate solution: plain banded
//! patterns and multi-banded patterns predicted from powers of the
//! Lyapunov operator.
//!
//! The power recursion runs on pure structure (all-ones value carriers),
//! so no incidental numeric cancellation can remove entries. Predicted
//! patterns are always symmetrized: symmetric `A`, `P` give a symmetric
//! solution, and symmetric patterns keep CGLS iterates symmetric.

use crate::banded::{BandedMatrix, SparsityPattern};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum PatternConfig {
    /// A priori bandwidth `y` (even).
    Banded { y: usize },
    /// Max power `z1` in the Lyapunov-operator recursion.
    Predicted { z1: usize },
}

impl PatternConfig {
    pub fn build(&self, a: &BandedMatrix, p: &BandedMatrix) -> Result<SparsityPattern> {
        match *self {
            PatternConfig::Banded { y } => banded_pattern(a.dim(), y),
            PatternConfig::Predicted { z1 } => predict_pattern(a, p, z1),
        }
    }
}

/// The exactly `y`-banded pattern.
pub fn banded_pattern(dim: usize, y: usize) -> Result<SparsityPattern> {
    SparsityPattern::banded(dim, y)
}

/// Structural pattern of `sum_{l=0..z1} A^l p` in matrix form: the union of
/// `S_0 = pattern(P)` and the recursion `S_l = pattern(A S_{l-1} + S_{l-1} A)`.
pub fn predict_pattern(
    a: &BandedMatrix,
    p: &BandedMatrix,
    z1: usize,
) -> Result<SparsityPattern> {
    if a.dim() != p.dim() {
        return Err(Error::DimensionMismatch(a.dim(), p.dim()));
    }
    let pa = a.pattern();
    let mut current = p.pattern();
    let mut union = current.clone();
    for _ in 0..z1 {
        current = lyap_image(&pa, &current)?;
        union = union.union(&current)?;
    }
    Ok(union.symmetrized())
}

/// Structural pattern of `A S + S A` for the all-ones carrier on `S`: the
/// positions reachable by one application of the Lyapunov operator. This
/// defines the retained rows of the reduced least-squares operator.
pub fn row_reach(a: &BandedMatrix, s: &SparsityPattern) -> Result<SparsityPattern> {
    if a.dim() != s.dim() {
        return Err(Error::DimensionMismatch(a.dim(), s.dim()));
    }
    lyap_image(&a.pattern(), s)
}

fn lyap_image(pa: &SparsityPattern, s: &SparsityPattern) -> Result<SparsityPattern> {
    pa.product(s)?.union(&s.product(pa)?)
}
