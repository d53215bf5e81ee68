//! Reconstruction and preservation checks against known ground truth.

use grassmannian::graph::{orthogonal_apartment, CliqueKind};
use grassmannian::grassmann::{random_subspace, Subspace, Tolerances};
use grassmannian::linalg::{CMatrix, C64};
use grassmannian::operators::{projective_equal, random_antiunitary, random_unitary, Endo};
use grassmannian::wigner::{
    check_injectivity, check_preservation, classify_star_image, constructed_pair, descent_trace,
    extract_line_map, reconstruct_half_dimension, reconstruct_operator, sample_pairs, wild_map_demo,
    Direction, FnTransformation, InducedTransformation, Orthocomplemented, PairKind, PairingEntry,
    PairingTable, Relation, Stage, TransformationOracle, WignerError,
};
use grassmannian::random::seeded;
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn scaled_operators_reconstruct_the_same_class() {
    let u = random_unitary(7, 21);
    for c in [C64::new(1e-3, 0.0), C64::new(-4.0, 2.5), C64::new(0.0, 30.0)] {
        let induced = InducedTransformation::new(u.scaled(c), 3);
        let oracle = TransformationOracle::new(&induced);
        let r = reconstruct_operator(&oracle, 8, 1, &tol()).unwrap();
        assert!(r.certified);
        let m = projective_equal(&r.operator, &u);
        assert!(m.matched && m.residual < 1e-10, "residual {}", m.residual);
    }
}

#[test]
fn reconstruction_is_phase_canonical() {
    let a = random_antiunitary(5, 3);
    let oracle_a = InducedTransformation::new(a.clone(), 2);
    let oracle_b = InducedTransformation::new(a.scaled(C64::from_polar(1.0, 2.0)), 2);
    let ra = reconstruct_operator(&TransformationOracle::new(&oracle_a), 4, 0, &tol()).unwrap();
    let rb = reconstruct_operator(&TransformationOracle::new(&oracle_b), 4, 0, &tol()).unwrap();
    let diff = (ra.operator.matrix() - rb.operator.matrix()).frobenius_norm();
    assert!(diff < 1e-10);
    assert_eq!(ra.operator.endo(), Endo::Conjugation);
    let c = ra.operator.matrix()[(0, 0)];
    assert!(c.im.abs() < 1e-12 && c.re > 0.0);
}

#[test]
fn query_count_is_reported() {
    let induced = InducedTransformation::new(random_unitary(9, 4), 4);
    let oracle = TransformationOracle::new(&induced);
    let r = reconstruct_operator(&oracle, 12, 0, &tol()).unwrap();
    assert_eq!(r.extraction_queries, 4 * 9 - 2);
    assert_eq!(r.validation_queries, 12);
    assert_eq!(r.queries_used, oracle.queries());
}

#[test]
fn ortho_adjacent_pairs_stay_ortho_adjacent() {
    let mut rng = seeded(5);
    let pairs: Vec<(Subspace, Subspace)> =
        (0..200).map(|_| constructed_pair(PairKind::OrthoAdjacent, 7, 3, &mut rng).unwrap()).collect();
    for op in [random_unitary(7, 1), random_antiunitary(7, 2)] {
        let induced = InducedTransformation::new(op, 3);
        let oracle = TransformationOracle::new(&induced);
        let r = check_preservation(&oracle, Relation::OrthoAdjacency, Direction::Both, &pairs, &tol()).unwrap();
        assert!(r.verdict);
        assert_eq!(r.sampled_pairs, 200);
    }
}

#[test]
fn induced_maps_are_injective_on_samples() {
    let pairs = sample_pairs(6, 2, 200, 8).unwrap();
    let induced = InducedTransformation::new(random_antiunitary(6, 8), 2);
    let oracle = TransformationOracle::new(&induced);
    let r = check_injectivity(&oracle, &pairs, &tol()).unwrap();
    assert!(r.verdict);

    let constant = FnTransformation { n: 6, k: 2, f: |_: &Subspace| Ok(random_subspace(6, 2, 0)?) };
    let oracle = TransformationOracle::new(&constant);
    assert!(!check_injectivity(&oracle, &pairs, &tol()).unwrap().verdict);
}

#[test]
fn transition_probability_survives_antiunitaries() {
    let pairs = sample_pairs(5, 2, 100, 3).unwrap();
    let induced = InducedTransformation::new(random_antiunitary(5, 6), 2);
    let oracle = TransformationOracle::new(&induced);
    let r =
        check_preservation(&oracle, Relation::TransitionProbability, Direction::Forward, &pairs, &tol()).unwrap();
    assert!(r.verdict);
}

#[test]
fn non_isometric_linear_maps_break_angles_but_not_adjacency() {
    let mut diag = vec![C64::new(1.0, 0.0); 6];
    diag[0] = C64::new(3.0, 0.0);
    let op = grassmannian::operators::SemilinearOperator::linear(CMatrix::from_diagonal(&diag)).unwrap();
    let induced = InducedTransformation::new(op, 2);
    let oracle = TransformationOracle::new(&induced);
    let pairs = sample_pairs(6, 2, 50, 4).unwrap();
    let angles = check_preservation(&oracle, Relation::AllPrincipalAngles, Direction::Both, &pairs, &tol()).unwrap();
    assert!(!angles.verdict);
    let adjacency = check_preservation(&oracle, Relation::Adjacency, Direction::Both, &pairs, &tol()).unwrap();
    assert!(adjacency.verdict);
    let orthogonality =
        check_preservation(&oracle, Relation::Orthogonality, Direction::Forward, &pairs, &tol()).unwrap();
    assert!(!orthogonality.verdict);
}

#[test]
fn pairing_tables_round_trip_and_drive_reconstruction_failure() {
    let induced = InducedTransformation::new(random_unitary(5, 9), 2);
    let domain: Vec<Subspace> = (0..4).map(|i| random_subspace(5, 2, i).unwrap()).collect();
    let table = PairingTable::tabulate(&induced, &domain).unwrap();
    let text = serde_json::to_string(table.entries()).unwrap();
    let entries: Vec<PairingEntry> = serde_json::from_str(&text).unwrap();
    let back = PairingTable::new(entries).unwrap();
    let oracle = TransformationOracle::new(&back);
    let expected = induced.operator.induced_map(&domain[2]).unwrap();
    assert!(oracle.query(&domain[2]).unwrap().same_as(&expected, 1e-12));
    assert!(matches!(
        reconstruct_operator(&oracle, 2, 0, &tol()),
        Err(WignerError::ReconstructionFailed { stage: Stage::LineExtraction, .. })
    ));
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(value[0].get("in").is_some() && value[0].get("out").is_some());
}

#[test]
fn orthocomplement_composition_needs_half_dimension() {
    let induced = InducedTransformation::new(random_unitary(7, 1), 3);
    assert!(Orthocomplemented::new(induced).is_err());
    let induced = InducedTransformation::new(random_unitary(8, 1), 4);
    let flipped = Orthocomplemented::new(induced).unwrap();
    let oracle = TransformationOracle::new(&flipped);
    assert!(matches!(reconstruct_operator(&oracle, 1, 0, &tol()), Err(WignerError::InsufficientAmbient { .. })));
    assert_eq!(classify_star_image(&oracle, 3, &tol()).unwrap(), CliqueKind::Top);
    let r = reconstruct_half_dimension(&flipped, 6, 2, &tol()).unwrap();
    assert!(r.result.certified);
    assert_eq!(r.star_images, CliqueKind::Top);
}

#[test]
fn wild_maps_are_outside_the_reconstruction_regime() {
    let apt = orthogonal_apartment(&CMatrix::identity(6), 3).unwrap();
    let demo = wild_map_demo(&apt, 4, &tol()).unwrap();
    let oracle = TransformationOracle::new(&demo.map);
    assert!(matches!(descent_trace(&oracle, 1, 0, &tol()), Err(WignerError::InsufficientAmbient { .. })));
    let p = Subspace::coordinate(6, &[0]).unwrap();
    assert!(extract_line_map(&oracle, &p, &tol()).is_err());
    // Its member table serializes as a pairing table.
    let table = PairingTable::new(demo.map.pairing_entries()).unwrap();
    assert_eq!(table.entries().len(), 20);
}

#[test]
fn descent_rejects_star_breaking_oracles() {
    let scrambled = FnTransformation {
        n: 7,
        k: 3,
        f: |x: &Subspace| {
            let key = x.projector().row_major().iter().enumerate().fold(0u64, |h, (i, z)| {
                h.wrapping_mul(31).wrapping_add((i as u64 + 1).wrapping_mul((z.re * 1e9).round() as i64 as u64))
            });
            Ok(random_subspace(7, 3, key)?)
        },
    };
    let oracle = TransformationOracle::new(&scrambled);
    assert!(matches!(descent_trace(&oracle, 2, 0, &tol()), Err(WignerError::StarImageNotInStar { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_isometries_reconstruct(seed in any::<u64>(), anti in any::<bool>(), size in 0usize..4) {
        let (n, k) = [(5, 2), (7, 2), (7, 3), (9, 4)][size];
        let truth = if anti { random_antiunitary(n, seed) } else { random_unitary(n, seed) };
        let induced = InducedTransformation::new(truth.clone(), k);
        let oracle = TransformationOracle::new(&induced);
        let r = reconstruct_operator(&oracle, 5, seed, &tol()).unwrap();
        prop_assert!(r.certified);
        prop_assert_eq!(r.operator.endo(), truth.endo());
        prop_assert!(projective_equal(&r.operator, &truth).residual < 1e-6);
        prop_assert!(r.extraction_queries <= 4 * n);
    }
}
