//! Operation-count estimates for the banded Chebyshev / quadrature pipeline.
//!
//! `o1` counts one step of the dropped Chebyshev recurrence, `o2` the full
//! order-`M` exponential approximation, `o3` the `2q+1`-node quadrature.
//! The estimates assume `d > m` and `l < d`; violations are reported but
//! estimates are still returned.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlopEstimates {
    pub o1: f64,
    pub o2: f64,
    pub o3: f64,
    /// False when the bandwidth assumptions (d > m, l < d) are violated.
    pub assumptions_hold: bool,
}

/// `nn` is the global dimension N*n; `m`, `d`, `l` are bandwidths of A, the
/// Chebyshev drop operator, and P; `cheb_order` is M; `quad_half_nodes` is q.
pub fn flop_estimates(
    nn: usize,
    m: usize,
    d: usize,
    l: usize,
    cheb_order: usize,
    quad_half_nodes: usize,
) -> FlopEstimates {
    let (nn_f, m_f, d_f, l_f) = (nn as f64, m as f64, d as f64, l as f64);
    let big_m = cheb_order as f64;
    let q = quad_half_nodes as f64;

    let o1 = nn_f * (m_f + d_f + 2.0 + (d_f + m_f + 1.0) * (2.0 * m_f + 1.0));
    let o2 = (big_m - 2.0) * o1 + 2.0 * nn_f * big_m * (d_f + 1.0);
    let o3 = (2.0 * q + 1.0)
        * (o2
            + nn_f * (d_f + l_f + 1.0) * (2.0 * l_f + 1.0)
            + nn_f * (2.0 * d_f + l_f + 1.0) * (2.0 * d_f + 1.0)
            + nn_f * (d_f + 1.0));

    FlopEstimates {
        o1,
        o2,
        o3,
        assumptions_hold: d > m && l < d,
    }
}
