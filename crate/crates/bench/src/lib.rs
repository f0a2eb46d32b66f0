//! Shared fixtures for the criterion benchmarks.

use lyapband::banded::BandedMatrix;
use lyapband::models::{gen_heat2d, ProblemInstance};

pub fn heat2d_fixture(n: usize) -> ProblemInstance {
    gen_heat2d(n).expect("benchmark model")
}

/// A banded matrix with the given dimension and bandwidth filled with a
/// smooth, deterministic value pattern.
pub fn filled_band(dim: usize, bandwidth: usize) -> BandedMatrix {
    let h = bandwidth / 2;
    let mut t = Vec::new();
    for i in 0..dim {
        for j in i.saturating_sub(h)..dim.min(i + h + 1) {
            let v = 1.0 / (1.0 + (i as f64 - j as f64).abs()) + 0.01 * (i as f64).sin();
            t.push((i, j, v));
        }
    }
    BandedMatrix::from_triplets(dim, &t).expect("band construction")
}
