//! Banded approximate solutions of the continuous-time Lyapunov equation
//! `A X + X A^T = P` for large symmetric banded `A` and `P`.
//!
//! Two solvers are provided:
//! - [`cgls`]: least squares restricted to an a priori sparsity pattern,
//!   solved matrix-free with CGLS.
//! - [`quad_gp`]: quadrature of the integral representation built from
//!   banded Chebyshev approximations of `exp(tA)`, refined by a gradient
//!   projection method.
//!
//! Supporting machinery: banded matrix arithmetic with bandwidth
//! projection ([`banded`]), extremal eigenvalue estimation ([`spectral`]),
//! benchmark model generators ([`models`]), a priori pattern prediction
//! ([`pattern`]), off-diagonal decay bounds ([`decay`]), and a dense
//! desk-scale oracle ([`oracle`]).

pub mod banded;
pub mod cgls;
pub mod cheb;
pub mod decay;
pub mod error;
pub mod flops;
pub mod io;
pub mod models;
pub mod oracle;
pub mod pattern;
pub mod quad_gp;
pub mod report;
pub mod spectral;

pub use banded::{BandedMatrix, SparsityPattern};
pub use error::{Error, Result};
pub use report::SolveReport;
pub use spectral::SpectralSummary;
