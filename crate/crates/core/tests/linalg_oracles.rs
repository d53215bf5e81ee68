//! Dense kernels checked against nalgebra's SVD and against algebraic
//! identities that do not depend on the Jacobi implementation.

use grassmannian::linalg::{
    intersect_spans, null_space, numerical_rank, orthonormalize, polar_unitary, svd, CMatrix, C64,
};
use grassmannian::random::{gaussian_matrix, seeded};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn to_nalgebra(a: &CMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

fn low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> CMatrix {
    let mut rng = seeded(seed);
    let left = gaussian_matrix(&mut rng, rows, rank);
    let right = gaussian_matrix(&mut rng, rank, cols);
    &left * &right
}

#[test]
fn singular_values_match_nalgebra() {
    for (seed, (r, c)) in [(4, 4), (6, 3), (3, 7), (8, 8), (1, 5)].into_iter().enumerate() {
        let a = gaussian_matrix(&mut seeded(seed as u64), r, c);
        let ours = svd(&a).unwrap().singular_values;
        let mut theirs: Vec<f64> = to_nalgebra(&a).singular_values().iter().copied().collect();
        theirs.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (s, t) in ours.iter().zip(&theirs) {
            assert!((s - t).abs() < 1e-12 * theirs[0].max(1.0), "{s} vs {t}");
        }
    }
}

#[test]
fn rank_matches_nalgebra_on_constructed_rank() {
    for rank in 1..=4 {
        let a = low_rank(7, 6, rank, rank as u64);
        assert_eq!(numerical_rank(&a, None), rank);
        assert_eq!(to_nalgebra(&a).rank(1e-8 * to_nalgebra(&a).norm()), rank);
    }
}

#[test]
fn polar_factor_matches_nalgebra_svd() {
    let a = gaussian_matrix(&mut seeded(9), 5, 5);
    let (w, _) = polar_unitary(&a).unwrap();
    let s = to_nalgebra(&a).svd(true, true);
    let reference = s.u.unwrap() * s.v_t.unwrap();
    for i in 0..5 {
        for j in 0..5 {
            assert!((w[(i, j)] - reference[(i, j)]).norm() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn svd_reconstructs(rows in 1usize..9, cols in 1usize..9, seed in any::<u64>()) {
        let a = gaussian_matrix(&mut seeded(seed), rows, cols);
        let s = svd(&a).unwrap();
        let err = (&s.reconstruct() - &a).frobenius_norm();
        prop_assert!(err <= 1e-12 * a.frobenius_norm().max(1.0));
        prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.u.orthonormality_defect() < 1e-12);
        prop_assert!(s.v.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn null_space_is_annihilated(rows in 2usize..8, cols in 2usize..8, seed in any::<u64>()) {
        let rank = 1 + (seed as usize) % rows.min(cols);
        let a = low_rank(rows, cols, rank, seed);
        let ns = null_space(&a, None).unwrap();
        prop_assert_eq!(ns.cols() + rank, cols);
        prop_assert!((&a * &ns).frobenius_norm() <= 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn intersection_dimension_formula(n in 3usize..9, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let kx = 1 + (seed as usize) % (n - 1);
        let ky = 1 + (seed as usize / 7) % (n - 1);
        let x = gaussian_matrix(&mut rng, n, kx);
        let y = gaussian_matrix(&mut rng, n, ky);
        let meet = intersect_spans(&x, &y, None).unwrap();
        let joined = x.hcat(&y).unwrap();
        prop_assert_eq!(meet.cols() + numerical_rank(&joined, None), kx + ky);
        let other = intersect_spans(&y, &x, None).unwrap();
        prop_assert_eq!(meet.cols(), other.cols());
    }

    #[test]
    fn orthonormalize_preserves_flag(n in 2usize..9, seed in any::<u64>()) {
        let k = 1 + (seed as usize) % n;
        let a = gaussian_matrix(&mut seeded(seed), n, k);
        let q = orthonormalize(&a).unwrap();
        prop_assert!(q.orthonormality_defect() < 1e-12);
        // Each leading block of q spans the matching leading block of a.
        for j in 1..=k {
            let lead = a.select_columns(&(0..j).collect::<Vec<_>>());
            let qj = q.select_columns(&(0..j).collect::<Vec<_>>());
            prop_assert_eq!(numerical_rank(&lead.hcat(&qj).unwrap(), None), j);
        }
    }
}
