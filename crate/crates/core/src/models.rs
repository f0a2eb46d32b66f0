//! Benchmark problem generators: 2D heat (deformable-mirror), 3D heat, and
//! a randomly generated stable block-tridiagonal model. All models use
//! local order n = 6 and share the same block-tridiagonal `P`.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LOCAL_ORDER: usize = 6;
const HEAT_DIAG: f64 = -1.36;
const HEAT_COUPLING: f64 = 0.34;
// Convective (Robin) surface loss at the two z-boundary layers of the 3D
// plate, relative to the conduction coupling. Calibrated so the condition
// number reaches 72 at a 30 x 30 grid and keeps growing with grid size.
const HEAT3D_SURFACE_LOSS: f64 = 0.59;

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub a: BandedMatrix,
    pub p: BandedMatrix,
    /// Number of subsystems N (the matrix is N*n x N*n).
    pub n_subsystems: usize,
    /// Local state order n.
    pub local_order: usize,
    pub label: String,
    pub seed: Option<u64>,
    /// Stability margin of the random model: lambda_max(W) = -margin.
    pub margin: Option<f64>,
}

/// Block tridiagonal `P` with diagonal blocks -(0.8 I + 0.2 ones) and
/// off-diagonal blocks of -0.1, shared by all models.
fn build_p(n_subsystems: usize) -> BandedMatrix {
    let n = LOCAL_ORDER;
    let dim = n_subsystems * n;
    let mut t = Vec::new();
    for blk in 0..n_subsystems {
        let base = blk * n;
        for r in 0..n {
            for c in 0..n {
                let v = if r == c { -1.0 } else { -0.2 };
                t.push((base + r, base + c, v));
            }
        }
        if blk + 1 < n_subsystems {
            let nb = (blk + 1) * n;
            for r in 0..n {
                for c in 0..n {
                    t.push((base + r, nb + c, -0.1));
                    t.push((nb + r, base + c, -0.1));
                }
            }
        }
    }
    BandedMatrix::from_triplets(dim, &t)
        .and_then(BandedMatrix::into_symmetric)
        .expect("P construction is symmetric by design")
}

/// 2D heat model with the default coupling e = 0.34.
pub fn gen_heat2d(n_subsystems: usize) -> Result<ProblemInstance> {
    gen_heat2d_coupling(n_subsystems, HEAT_COUPLING)
}

/// 2D heat template with adjustable coupling strength; scaling `e` moves
/// the condition number of `A` while keeping the structure of Eq-58-style
/// block tridiagonal models.
pub fn gen_heat2d_coupling(n_subsystems: usize, coupling: f64) -> Result<ProblemInstance> {
    if n_subsystems < 2 {
        return Err(Error::InvalidArgument(
            "heat2d requires at least 2 subsystems".into(),
        ));
    }
    let n = LOCAL_ORDER;
    let dim = n_subsystems * n;
    let mut t = Vec::new();
    for blk in 0..n_subsystems {
        let base = blk * n;
        for r in 0..n {
            t.push((base + r, base + r, HEAT_DIAG));
            if r + 1 < n {
                t.push((base + r, base + r + 1, coupling));
                t.push((base + r + 1, base + r, coupling));
            }
        }
        if blk + 1 < n_subsystems {
            let nb = (blk + 1) * n;
            for r in 0..n {
                t.push((base + r, nb + r, coupling));
                t.push((nb + r, base + r, coupling));
            }
        }
    }
    let a = BandedMatrix::from_triplets(dim, &t)?.into_symmetric()?;
    Ok(ProblemInstance {
        a,
        p: build_p(n_subsystems),
        n_subsystems,
        local_order: n,
        label: "heat2d".into(),
        seed: None,
        margin: None,
    })
}

/// 3D heat model on an `n1 x n1` grid of subsystems, each holding 6
/// temperatures along z. 7-point-stencil coupling 0.34 to existing grid
/// neighbors; fixed-temperature (Dirichlet) edges in the x-y plane and
/// convective surface loss at the top and bottom z layers. Subsystems are
/// ordered row-major, giving block off-diagonals at block offsets 1 and
/// `n1`.
pub fn gen_heat3d(n1: usize) -> Result<ProblemInstance> {
    if n1 < 2 {
        return Err(Error::InvalidArgument(
            "heat3d requires a grid of at least 2 x 2".into(),
        ));
    }
    let n = LOCAL_ORDER;
    let n_subsystems = n1 * n1;
    let dim = n_subsystems * n;
    let e = HEAT_COUPLING;
    let mut t = Vec::new();
    for ix in 0..n1 {
        for iy in 0..n1 {
            let sub = ix * n1 + iy;
            let base = sub * n;
            let mut xy_neighbors = Vec::new();
            if ix > 0 {
                xy_neighbors.push((ix - 1) * n1 + iy);
            }
            if ix + 1 < n1 {
                xy_neighbors.push((ix + 1) * n1 + iy);
            }
            if iy > 0 {
                xy_neighbors.push(ix * n1 + iy - 1);
            }
            if iy + 1 < n1 {
                xy_neighbors.push(ix * n1 + iy + 1);
            }
            for z in 0..n {
                // Dirichlet in-plane: missing x-y neighbors still count
                // toward the diagonal; the z stencil contributes 2 in the
                // interior and 1 + surface loss at the plate faces.
                let z_deg = if z == 0 || z == n - 1 {
                    1.0 + HEAT3D_SURFACE_LOSS
                } else {
                    2.0
                };
                t.push((base + z, base + z, -e * (4.0 + z_deg)));
                if z + 1 < n {
                    t.push((base + z, base + z + 1, e));
                    t.push((base + z + 1, base + z, e));
                }
                for &nb in &xy_neighbors {
                    t.push((base + z, nb * n + z, e));
                }
            }
        }
    }
    let a = BandedMatrix::from_triplets(dim, &t)?.into_symmetric()?;
    Ok(ProblemInstance {
        a,
        p: build_p(n_subsystems),
        n_subsystems,
        local_order: n,
        label: "heat3d".into(),
        seed: None,
        margin: None,
    })
}

/// Random block-tridiagonal model: 6x6 blocks with entries uniform on
/// [0, 1), symmetrized, then shifted by `nu I` so that
/// `lambda_max(W) = -margin`. Deterministic for a fixed seed.
pub fn gen_random_stable(
    n_subsystems: usize,
    seed: u64,
    margin: Option<f64>,
) -> Result<ProblemInstance> {
    if n_subsystems < 2 {
        return Err(Error::InvalidArgument(
            "random model requires at least 2 subsystems".into(),
        ));
    }
    let n = LOCAL_ORDER;
    let dim = n_subsystems * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    for i in 0..n_subsystems {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(n_subsystems - 1);
        for j in lo..=hi {
            for r in 0..n {
                for c in 0..n {
                    t.push((i * n + r, j * n + c, rng.gen::<f64>()));
                }
            }
        }
    }
    let raw = BandedMatrix::from_triplets(dim, &t)?;
    let sym = raw.symmetrize();

    let spec = crate::spectral::extreme_eigs(&sym, 1e-10)?;
    let margin = margin.unwrap_or_else(|| {
        let mean_diag: f64 =
            (0..dim).map(|i| sym.get(i, i)).sum::<f64>() / dim as f64;
        0.05 * mean_diag.abs()
    });
    if margin <= 0.0 {
        return Err(Error::InvalidArgument("margin must be positive".into()));
    }
    let nu = -spec.b - margin;
    let w = sym.add(&BandedMatrix::identity(dim).scale(nu), 1.0, 1.0)?;

    Ok(ProblemInstance {
        a: w,
        p: build_p(n_subsystems),
        n_subsystems,
        local_order: n,
        label: "random".into(),
        seed: Some(seed),
        margin: Some(margin),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::extreme_eigs;

    #[test]
    fn heat2d_small_values() {
        let m = gen_heat2d(2).unwrap();
        assert_eq!(m.a.dim(), 12);
        assert_eq!(m.a.get(0, 0), -1.36);
        assert_eq!(m.a.get(0, 1), 0.34);
        assert_eq!(m.a.get(0, 6), 0.34);
        assert_eq!(m.a.get(0, 7), 0.0);
        assert!(!m.a.pattern().contains(0, 7));
    }

    #[test]
    fn heat2d_rejects_small_n() {
        assert!(gen_heat2d(1).is_err());
    }

    #[test]
    fn heat2d_bandwidth() {
        let m = gen_heat2d(10).unwrap();
        assert_eq!(m.a.dim(), 60);
        // block tridiagonal with 6x6 blocks: max structural offset 6 + 5 = 11
        assert_eq!(m.a.max_offset(), Some(6));
        assert_eq!(m.p.max_offset(), Some(11));
    }

    #[test]
    fn heat2d_condition_number() {
        let m = gen_heat2d(200).unwrap();
        let s = extreme_eigs(&m.a, 1e-8).unwrap();
        assert!(s.a < 0.0 && s.b < 0.0);
        assert!((s.kappa - 39.0).abs() <= 0.05 * 39.0, "kappa = {}", s.kappa);
    }

    #[test]
    fn heat3d_structure() {
        let m = gen_heat3d(5).unwrap();
        assert_eq!(m.a.dim(), 150);
        // block bands at block offsets 0, 1, 5 (6x6 blocks)
        let p = m.a.pattern();
        assert!(p.contains(0, 6)); // offset-1 block
        assert!(p.contains(0, 30)); // offset-n1 block
        assert!(!p.contains(0, 12));
        assert_eq!(p.max_offset(), Some(6 * 5));
        let s = extreme_eigs(&m.a, 1e-8).unwrap();
        assert!(s.b < 0.0, "3D heat model must be stable, b = {}", s.b);
    }

    #[test]
    fn heat3d_condition_number() {
        let m = gen_heat3d(30).unwrap();
        let s = extreme_eigs(&m.a, 1e-8).unwrap();
        assert!((s.kappa - 72.0).abs() <= 0.05 * 72.0, "kappa = {}", s.kappa);
    }

    #[test]
    fn heat3d_max_offset_law() {
        for n1 in [2, 3, 4] {
            let m = gen_heat3d(n1).unwrap();
            assert_eq!(m.a.max_offset(), Some(6 * n1));
        }
    }

    #[test]
    fn random_model_margin_and_determinism() {
        let m1 = gen_random_stable(10, 42, Some(0.1)).unwrap();
        let m2 = gen_random_stable(10, 42, Some(0.1)).unwrap();
        assert_eq!(m1.a, m2.a);
        let s = extreme_eigs(&m1.a, 1e-10).unwrap();
        assert!((s.b + 0.1).abs() < 1e-6, "lambda_max = {}", s.b);

        let m3 = gen_random_stable(10, 43, Some(0.1)).unwrap();
        assert_ne!(m1.a, m3.a);
    }

    #[test]
    fn all_models_stable() {
        for inst in [
            gen_heat2d(8).unwrap(),
            gen_heat3d(3).unwrap(),
            gen_random_stable(8, 7, None).unwrap(),
        ] {
            let s = extreme_eigs(&inst.a, 1e-9).unwrap();
            assert!(s.b < 0.0, "{} unstable: b = {}", inst.label, s.b);
            assert!(inst.a.is_symmetric());
            assert!(inst.p.is_symmetric());
        }
    }
}
