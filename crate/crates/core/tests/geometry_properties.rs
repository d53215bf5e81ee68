//! Invariants of principal angles, relations and the Grassmann graph.

use grassmannian::graph::{
    build_graph, geodesic_between, orthogonal_apartment, star_family, top_family, verify_geodesic,
    GrassmannGraphView,
};
use grassmannian::grassmann::{
    commutator_norm, decompose, distance, intersection_dim, intersection_dim_by_rank,
    is_compatible, is_compatible_by_angles, orthocomplement, principal_angles, random_subspace,
    relation_report, transition_probability, Subspace, Tolerances,
};
use grassmannian::linalg::{dot, C64};
use grassmannian::operators::{random_antiunitary, random_unitary};
use grassmannian::random::{seeded, unit_vector};
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn dims() -> impl Strategy<Value = (usize, usize, u64)> {
    (3usize..9).prop_flat_map(|n| (Just(n), 1..n, any::<u64>()))
}

/// Pair sharing `shared` directions with a generic remainder.
fn pair_with_shared(n: usize, k: usize, shared: usize, seed: u64) -> (Subspace, Subspace) {
    let u = random_unitary(n, seed).matrix().clone();
    let x = Subspace::from_frame(u.select_columns(&(0..k).collect::<Vec<_>>())).unwrap();
    let mut frame = u.select_columns(&(0..shared).collect::<Vec<_>>());
    let mut rng = seeded(seed ^ 0xabc);
    for _ in shared..k {
        frame.push_column(&unit_vector(&mut rng, n));
    }
    (x, Subspace::from_frame(frame).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn angles_are_symmetric_and_bounded((n, k, seed) in dims()) {
        let x = random_subspace(n, k, seed).unwrap();
        let y = random_subspace(n, k, seed.wrapping_add(1)).unwrap();
        let a = principal_angles(&x, &y).unwrap().angles;
        let b = principal_angles(&y, &x).unwrap().angles;
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() < 1e-10);
            prop_assert!(*p >= 0.0 && *p <= std::f64::consts::FRAC_PI_2 + 1e-12);
        }
        prop_assert!(a.windows(2).all(|w| w[0] <= w[1] + 1e-14));
    }

    #[test]
    fn angles_are_invariant_under_isometries((n, k, seed) in dims(), anti in any::<bool>()) {
        let x = random_subspace(n, k, seed).unwrap();
        let y = random_subspace(n, k, seed.wrapping_add(1)).unwrap();
        let l = if anti { random_antiunitary(n, seed) } else { random_unitary(n, seed) };
        let a = principal_angles(&x, &y).unwrap().angles;
        let b = principal_angles(&l.induced_map(&x).unwrap(), &l.induced_map(&y).unwrap()).unwrap().angles;
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() < 1e-8);
        }
    }

    #[test]
    fn intersection_counts_agree((n, k, seed) in dims(), shared_frac in 0.0f64..1.0) {
        let shared = ((k as f64) * shared_frac) as usize;
        prop_assume!(2 * k - shared <= n);
        let (x, y) = pair_with_shared(n, k, shared, seed);
        let t = tol();
        let by_angles = intersection_dim(&x, &y, &t).unwrap();
        prop_assert_eq!(by_angles, shared);
        prop_assert_eq!(intersection_dim_by_rank(&x, &y, &t).unwrap(), shared);
        prop_assert_eq!(intersection_dim_by_rank(&y, &x, &t).unwrap(), shared);
        prop_assert_eq!(distance(&x, &y, &t).unwrap(), k - shared);
    }

    #[test]
    fn compatibility_tests_agree((n, k, seed) in dims(), apartment in any::<bool>()) {
        let t = tol();
        let (x, y) = if apartment {
            let u = random_unitary(n, seed).matrix().clone();
            let off = (seed as usize) % (n - k + 1);
            (
                Subspace::from_frame(u.select_columns(&(0..k).collect::<Vec<_>>())).unwrap(),
                Subspace::from_frame(u.select_columns(&(off..off + k).collect::<Vec<_>>())).unwrap(),
            )
        } else {
            (random_subspace(n, k, seed).unwrap(), random_subspace(n, k, seed ^ 1).unwrap())
        };
        let by_commutator = is_compatible(&x, &y, &t).unwrap();
        prop_assert_eq!(by_commutator, is_compatible_by_angles(&x, &y, &t).unwrap());
        if apartment {
            prop_assert!(by_commutator);
            prop_assert!(commutator_norm(&x, &y).unwrap() < 1e-12);
        }
    }

    #[test]
    fn transition_probability_is_sum_of_squared_cosines((n, k, seed) in dims()) {
        let x = random_subspace(n, k, seed).unwrap();
        let y = random_subspace(n, k, seed ^ 5).unwrap();
        let tp = transition_probability(&x, &y).unwrap();
        // tr(P_X P_Y) is an independent expression of the same quantity.
        let trace = (&x.projector() * &y.projector()).trace();
        prop_assert!((tp - trace.re).abs() < 1e-10);
        prop_assert!(trace.im.abs() < 1e-10);
    }

    #[test]
    fn geodesics_have_exact_bookkeeping((n, k, seed) in dims()) {
        let x = random_subspace(n, k, seed).unwrap();
        let y = random_subspace(n, k, seed ^ 9).unwrap();
        let t = tol();
        let path = geodesic_between(&x, &y, &t).unwrap();
        prop_assert_eq!(path.len() - 1, distance(&x, &y, &t).unwrap());
        prop_assert!(verify_geodesic(&path, &t).unwrap());
    }
}

#[test]
fn line_transition_probability_is_squared_overlap() {
    let mut rng = seeded(3);
    for _ in 0..20 {
        let (a, b) = (unit_vector(&mut rng, 5), unit_vector(&mut rng, 5));
        let x = Subspace::from_vectors(5, std::slice::from_ref(&a)).unwrap();
        let y = Subspace::from_vectors(5, std::slice::from_ref(&b)).unwrap();
        let expected = dot(&a, &b).norm_sqr();
        assert!((transition_probability(&x, &y).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn orthocomplement_is_orthogonal_only_at_half_dimension() {
    let t = tol();
    let x = random_subspace(6, 3, 1).unwrap();
    let c = orthocomplement(&x).unwrap();
    let r = relation_report(&x, &c, &t).unwrap();
    assert!(r.orthogonal && r.compatible && !r.adjacent);
    let angles = decompose(&x, &c).unwrap().angles;
    assert!(angles.iter().all(|a| (a - std::f64::consts::FRAC_PI_2).abs() < 1e-10));
}

#[test]
fn stars_and_tops_are_cliques_and_mixed_pairs_usually_are_not() {
    let t = tol();
    let mut rng = seeded(12);
    let s = random_subspace(7, 2, 4).unwrap();
    let dirs: Vec<Vec<C64>> = (0..5).map(|_| unit_vector(&mut rng, 7)).collect();
    let star = star_family(&s, &dirs, &t).unwrap();
    let u = random_subspace(7, 4, 5).unwrap();
    let dropped: Vec<Vec<C64>> = (0..4).map(|_| u.frame().mul_vec(&unit_vector(&mut rng, 4))).collect();
    let top = top_family(&u, &dropped, &t).unwrap();
    let g = build_graph(&star, &t).unwrap();
    assert!(g.is_clique(&(0..star.len()).collect::<Vec<_>>()));
    let g = build_graph(&top, &t).unwrap();
    assert!(g.is_clique(&(0..top.len()).collect::<Vec<_>>()));
    let mixed = build_graph(&[star[0].clone(), top[0].clone()], &t).unwrap();
    assert_eq!(mixed.degree(0), 0);
}

#[test]
fn graph_view_round_trips_through_json() {
    let t = tol();
    let apt = orthogonal_apartment(random_unitary(5, 2).matrix(), 2).unwrap();
    let g = apt.graph(&t).unwrap();
    let text = serde_json::to_string(&g).unwrap();
    let back: GrassmannGraphView = serde_json::from_str(&text).unwrap();
    assert_eq!(back.len(), 10);
    assert_eq!(back.edges, g.edges);
    // Johnson graph J(5, 2) is 6-regular.
    assert!((0..10).all(|v| back.degree(v) == 6));

    let value: serde_json::Value = serde_json::from_str(&serde_json::to_string(&apt).unwrap()).unwrap();
    assert_eq!(value["k"], 2);
    assert_eq!(value["subsets"].as_array().unwrap().len(), 10);
}

#[test]
fn subspace_json_is_canonicalized_on_load() {
    let text = r#"{"n":3,"k":2,"frame":{"rows":3,"cols":2,"re":[1,1,0,1,0,0],"im":[0,0,0,0,0,0]}}"#;
    let s: Subspace = serde_json::from_str(text).unwrap();
    assert!(s.frame().orthonormality_defect() < 1e-14);
    assert!(s.same_as(&Subspace::coordinate(3, &[0, 1]).unwrap(), 1e-12));
    let rank_deficient = r#"{"n":3,"k":2,"frame":{"rows":3,"cols":2,"re":[1,2,1,2,0,0],"im":[0,0,0,0,0,0]}}"#;
    assert!(serde_json::from_str::<Subspace>(rank_deficient).is_err());
}
