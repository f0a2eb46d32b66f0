//! Dense desk-scale ground truth: exact Lyapunov solve for symmetric `A`,
//! dense matrix exponential, dense Kronecker-sum assembly, and the relative
//! accuracy metric. Dimensions are capped; these routines exist to check
//! the sparse solvers, not to compete with them.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::spectral;
use nalgebra::{DMatrix, SymmetricEigen};

pub type DenseMatrix = DMatrix<f64>;

pub const LYAP_DIM_CAP: usize = 4096;
pub const EXPM_DIM_CAP: usize = 2048;
pub const KRON_DIM_CAP: usize = 72;

fn check_symmetric(m: &DenseMatrix) -> Result<()> {
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in i + 1..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::NotSymmetric { i, j });
            }
        }
    }
    Ok(())
}

/// Solves `A X + X A = P` for symmetric stable `A` via eigendecomposition:
/// `X_hat_ij = (Q^T P Q)_ij / (lambda_i + lambda_j)`. The residual
/// `|P - A X - X A|_F <= 1e-10 |P|_F` is enforced on every call.
///
/// The eigensolver can pair eigenvectors imperfectly when the spectrum has
/// many exact degeneracies; the decomposition then solves a nearby problem
/// exactly, so iterative refinement on the residual restores full accuracy.
pub fn dense_lyap(a: &DenseMatrix, p: &DenseMatrix) -> Result<DenseMatrix> {
    let dim = a.nrows();
    if dim > LYAP_DIM_CAP {
        return Err(Error::DenseCapExceeded(dim, LYAP_DIM_CAP));
    }
    if p.nrows() != dim || p.ncols() != dim || a.ncols() != dim {
        return Err(Error::DimensionMismatch(dim, p.nrows()));
    }
    check_symmetric(a)?;

    let eig = SymmetricEigen::new(a.clone());
    let q = &eig.eigenvectors;
    let lambda = &eig.eigenvalues;
    let solve = |rhs: &DenseMatrix| -> Result<DenseMatrix> {
        let mut x_hat = q.transpose() * rhs * q;
        for i in 0..dim {
            for j in 0..dim {
                let denom = lambda[i] + lambda[j];
                if denom == 0.0 {
                    return Err(Error::OracleCheck(format!(
                        "lambda_{i} + lambda_{j} = 0; A is not stable"
                    )));
                }
                x_hat[(i, j)] /= denom;
            }
        }
        Ok(q * x_hat * q.transpose())
    };

    let mut x = solve(p)?;
    let mut rel = f64::INFINITY;
    for _ in 0..5 {
        let residual = p - a * &x - &x * a.transpose();
        rel = residual.norm() / p.norm();
        if rel <= 1e-10 {
            return Ok(x);
        }
        x += solve(&residual)?;
    }
    Err(Error::OracleCheck(format!(
        "lyap residual {rel:.3e} exceeds 1e-10 after refinement"
    )))
}

/// `exp(t A)` for symmetric `A` via `Q exp(t Lambda) Q^T`.
pub fn dense_expm(a: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    let dim = a.nrows();
    if dim > EXPM_DIM_CAP {
        return Err(Error::DenseCapExceeded(dim, EXPM_DIM_CAP));
    }
    check_symmetric(a)?;
    let eig = SymmetricEigen::new(a.clone());
    let q = &eig.eigenvectors;
    let exp_lambda = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (t * l).exp()));
    Ok(q * exp_lambda * q.transpose())
}

/// Dense Kronecker sum `I (x) A + A (x) I` of dimension `dim^2`.
pub fn kron_assemble(a: &BandedMatrix) -> Result<DenseMatrix> {
    let dim = a.dim();
    if dim > KRON_DIM_CAP {
        return Err(Error::DenseCapExceeded(dim, KRON_DIM_CAP));
    }
    let big = dim * dim;
    let mut out = DMatrix::zeros(big, big);
    // vec convention: position of (i, j) is j*dim + i (column-major)
    for (i, j, v) in a.iter() {
        for k in 0..dim {
            // I (x) A: block diagonal copies of A
            out[(k * dim + i, k * dim + j)] += v;
            // A (x) I: scalar A_ij times identity blocks
            out[(i * dim + k, j * dim + k)] += v;
        }
    }
    Ok(out)
}

/// Relative accuracy `|X_approx - X_true|_2 / |X_true|_2` (2-norms estimated
/// by power iteration on the densified difference).
pub fn accuracy(x_approx: &DenseMatrix, x_true: &DenseMatrix) -> Result<f64> {
    if x_approx.nrows() != x_true.nrows() || x_approx.ncols() != x_true.ncols() {
        return Err(Error::DimensionMismatch(x_approx.nrows(), x_true.nrows()));
    }
    let denom = dense_norm2(x_true, 1e-10);
    if denom == 0.0 {
        return Err(Error::InvalidArgument("X_true is zero".into()));
    }
    let diff = x_approx - x_true;
    Ok(dense_norm2(&diff, 1e-10) / denom)
}

pub fn dense_norm2(m: &DenseMatrix, rel_tol: f64) -> f64 {
    let dim = m.nrows();
    spectral::norm2_power(
        |v, y| {
            let vv = nalgebra::DVector::from_column_slice(v);
            y.copy_from_slice((m * vv).as_slice());
        },
        |v, y| {
            let vv = nalgebra::DVector::from_column_slice(v);
            y.copy_from_slice((m.transpose() * vv).as_slice());
        },
        dim,
        rel_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::gen_heat2d;

    #[test]
    fn lyap_minus_identity() {
        let a = DMatrix::from_diagonal_element(3, 3, -1.0);
        let p = DMatrix::from_diagonal_element(3, 3, -2.0);
        let x = dense_lyap(&a, &p).unwrap();
        assert!((x - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn lyap_gamma_a_closed_form() {
        let m = gen_heat2d(4).unwrap();
        let a = m.a.to_dense();
        let gamma = -2.0;
        let p = &a * gamma;
        let x = dense_lyap(&a, &p).unwrap();
        let expected = DMatrix::from_diagonal_element(a.nrows(), a.ncols(), gamma / 2.0);
        assert!((x - expected).norm() < 1e-10);
    }

    #[test]
    fn lyap_rejects_nonsymmetric() {
        let mut a = DMatrix::from_diagonal_element(2, 2, -1.0);
        a[(0, 1)] = 0.5;
        let p = DMatrix::from_diagonal_element(2, 2, -1.0);
        assert!(dense_lyap(&a, &p).is_err());
    }

    #[test]
    fn expm_trivial_and_semigroup() {
        let a = DMatrix::from_partial_diagonal(2, 2, &[-1.0, -2.0]);
        assert!((dense_expm(&a, 0.0).unwrap() - DMatrix::identity(2, 2)).norm() < 1e-14);
        let e1 = dense_expm(&a, 1.0).unwrap();
        assert!((e1[(0, 0)] - (-1.0f64).exp()).abs() < 1e-14);
        assert!((e1[(1, 1)] - (-2.0f64).exp()).abs() < 1e-14);

        let m = gen_heat2d(3).unwrap().a.to_dense();
        let one = dense_expm(&m, 1.0).unwrap();
        let two = dense_expm(&m, 2.0).unwrap();
        assert!((&one * &one - two).norm() < 1e-10);
    }

    #[test]
    fn expm_derivative_spot_check() {
        let m = gen_heat2d(2).unwrap().a.to_dense();
        let h = 1e-6;
        let e = dense_expm(&m, 1.0).unwrap();
        let e_h = dense_expm(&m, 1.0 + h).unwrap();
        let fd = (e_h - &e) / h;
        let truth = &m * &e;
        assert!((fd - &truth).norm() / truth.norm() < 1e-5);
    }

    #[test]
    fn kron_diagonal_case() {
        let a = BandedMatrix::diagonal(&[2.0, 5.0]);
        let k = kron_assemble(&a).unwrap();
        let expected = DMatrix::from_partial_diagonal(4, 4, &[4.0, 7.0, 7.0, 10.0]);
        assert!((k - expected).norm() < 1e-14);
    }

    #[test]
    fn kron_vec_identity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let dim = 5;
        let m = gen_heat2d(2).unwrap();
        let a = m.a.project_band(8).unwrap(); // any banded A works here
        let a = BandedMatrix::from_dense(&a.to_dense().view_range(0..dim, 0..dim).into());
        let x = DMatrix::from_fn(dim, dim, |_, _| rng.gen::<f64>());
        let k = kron_assemble(&a).unwrap();

        let vec_x = nalgebra::DVector::from_column_slice(x.as_slice());
        let lhs = &k * vec_x;
        let ad = a.to_dense();
        let rhs_mat = &ad * &x + &x * &ad;
        let rhs = nalgebra::DVector::from_column_slice(rhs_mat.as_slice());
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn accuracy_metric() {
        let m = gen_heat2d(2).unwrap().a.to_dense();
        assert!(accuracy(&m, &m).unwrap() < 1e-14);
        let double = &m * 2.0;
        assert!((accuracy(&double, &m).unwrap() - 1.0).abs() < 1e-8);
    }
}
