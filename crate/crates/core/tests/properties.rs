//! Randomized structural and numerical invariants of the banded matrix
//! layer and the pattern algebra.

use lyapband::banded::{BandedMatrix, SparsityPattern};
use lyapband::io::{read_matrix_market, write_matrix_market};
use lyapband::pattern::{predict_pattern, row_reach};
use proptest::prelude::*;

/// Random banded matrix of the given dimension and even bandwidth.
fn banded_matrix(dim: usize, bandwidth: usize) -> impl Strategy<Value = BandedMatrix> {
    let h = bandwidth / 2;
    let nnz: usize = (0..dim).map(|i| dim.min(i + h + 1) - i.saturating_sub(h)).sum();
    proptest::collection::vec(-1.0f64..1.0, nnz).prop_map(move |vals| {
        let p = SparsityPattern::banded(dim, bandwidth).unwrap();
        BandedMatrix::from_pattern_values(&p, &vals)
    })
}

fn dims_and_bands() -> impl Strategy<Value = (usize, usize, usize)> {
    (8usize..=64).prop_flat_map(|dim| {
        let max_h = (dim - 1).min(8);
        (Just(dim), 0..=max_h, 0..=max_h).prop_map(|(d, h1, h2)| (d, 2 * h1, 2 * h2))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn product_bandwidth_sum_law((dim, s1, s2) in dims_and_bands(),
                                 seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mk = |s: usize, rng: &mut rand_chacha::ChaCha8Rng| {
            let p = SparsityPattern::banded(dim, s).unwrap();
            let vals: Vec<f64> = (0..p.nnz()).map(|_| rng.gen::<f64>() - 0.5).collect();
            BandedMatrix::from_pattern_values(&p, &vals)
        };
        let a = mk(s1, &mut rng);
        let b = mk(s2, &mut rng);
        let prod = a.mul(&b).unwrap();
        let max_off = prod.max_offset().unwrap_or(0);
        prop_assert!(2 * max_off <= s1 + s2,
            "product offset {max_off} exceeds (s1+s2)/2 = {}", (s1 + s2) / 2);
    }

    #[test]
    fn mul_matches_dense(x in banded_matrix(12, 4), y in banded_matrix(12, 6)) {
        let sparse = x.mul(&y).unwrap().to_dense();
        let dense = x.to_dense() * y.to_dense();
        let scale = dense.amax().max(1.0);
        prop_assert!((sparse - dense).amax() <= 8.0 * f64::EPSILON * scale);
    }

    #[test]
    fn add_matches_dense_exactly(x in banded_matrix(10, 4), y in banded_matrix(10, 2),
                                 alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let sparse = x.add(&y, alpha, beta).unwrap();
        // same expression per entry, so the result is bitwise identical
        for (i, j, v) in sparse.iter() {
            let expected = alpha * x.get(i, j) + beta * y.get(i, j);
            prop_assert_eq!(v.to_bits(), expected.to_bits());
        }
    }

    #[test]
    fn projection_is_exact_and_idempotent(x in banded_matrix(16, 8), d in 0usize..8) {
        let d = 2 * (d / 2);
        let p = x.project_band(d).unwrap();
        prop_assert!(p.max_offset().unwrap_or(0) <= d / 2);
        for (i, j, v) in p.iter() {
            prop_assert_eq!(v.to_bits(), x.get(i, j).to_bits());
        }
        prop_assert_eq!(p.project_band(d).unwrap(), p);
    }

    #[test]
    fn matrix_market_round_trip(x in banded_matrix(9, 4)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mtx");
        write_matrix_market(&x, &path).unwrap();
        let back = read_matrix_market(&path).unwrap();
        prop_assert_eq!(back.dim(), x.dim());
        // 17 significant digits round-trip doubles exactly; zeros may be
        // dropped structurally by the writer
        for (i, j, v) in x.iter() {
            prop_assert_eq!(back.get(i, j).to_bits(), v.to_bits());
        }
    }

    #[test]
    fn symmetrize_is_idempotent(x in banded_matrix(10, 6)) {
        let s = x.symmetrize();
        prop_assert!(s.is_symmetric());
        prop_assert_eq!(s.asymmetry(), 0.0);
        let twice = s.symmetrize();
        for (i, j, v) in twice.iter() {
            prop_assert_eq!(v.to_bits(), s.get(i, j).to_bits());
        }
    }

    #[test]
    fn pattern_algebra_monotone(n_sub in 2usize..6, z1 in 0usize..4) {
        let m = lyapband::models::gen_heat2d(n_sub).unwrap();
        let s = predict_pattern(&m.a, &m.p, z1).unwrap();
        let bigger = predict_pattern(&m.a, &m.p, z1 + 1).unwrap();
        prop_assert!(s.is_subset_of(&bigger));
        // the reach of S contains S because A has a full diagonal
        let r = row_reach(&m.a, &s).unwrap();
        prop_assert!(s.is_subset_of(&r));
        prop_assert!(s.is_symmetric());
    }
}
