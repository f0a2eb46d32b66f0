//! Solve reports shared by the solvers and the experiment front end.

use crate::flops::FlopEstimates;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    /// "cgls" or "cheb-gp".
    pub method: String,
    /// All parameter values actually used, defaults included.
    pub parameters: serde_json::Value,
    /// Per-iteration stopping quantity: eta for CGLS, F1 for gradient projection.
    pub history: Vec<f64>,
    pub wall_seconds: f64,
    /// Peak structural nonzeros across live matrices (memory proxy).
    pub peak_nnz: usize,
    pub final_nnz: usize,
    pub converged: bool,
    /// Non-fatal events: breakdown, backtracking exhausted, ...
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flops: Option<FlopEstimates>,
    /// Relative accuracy vs the dense oracle, when it ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

impl SolveReport {
    pub fn new(method: &str, parameters: serde_json::Value) -> Self {
        SolveReport {
            method: method.to_string(),
            parameters,
            history: Vec::new(),
            wall_seconds: 0.0,
            peak_nnz: 0,
            final_nnz: 0,
            converged: false,
            flags: Vec::new(),
            flops: None,
            accuracy: None,
        }
    }
}
