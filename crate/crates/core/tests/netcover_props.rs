use proptest::prelude::*;
use randomizer_core::linalg::trace_norm;
use randomizer_core::netcover::{
    audit_covering, build_delta_net, log_cardinality_bound, trace_distance_pure, verify_separation,
};
use randomizer_core::{PureState, RngStream};

#[test]
fn uniform_states_have_flat_first_moment() {
    let mut rng = RngStream::new(50, 0);
    let n = 100_000;
    let s: f64 = (0..n)
        .map(|_| PureState::random(4, &mut rng).unwrap().amplitudes()[0].norm_sqr())
        .sum();
    assert!((s / n as f64 - 0.25).abs() <= 0.01);
}

#[test]
fn closed_form_distance_matches_eigensolver() {
    let mut rng = RngStream::new(51, 0);
    for k in 0..1000 {
        let d = 1 + k % 8;
        let x = PureState::random(d, &mut rng).unwrap();
        let y = PureState::random(d, &mut rng).unwrap();
        let closed = trace_distance_pure(&x, &y).unwrap();
        let direct = trace_norm(&x.projector().sub(&y.projector()).unwrap()).unwrap();
        assert!((closed - direct).abs() <= 1e-10, "{closed} vs {direct}");
    }
}

#[test]
fn built_nets_are_separated_and_within_cardinality_bound() {
    for (d, delta, seed) in [(2, 0.5, 1u64), (2, 0.3, 2), (3, 0.9, 3), (1, 0.1, 4)] {
        let net = build_delta_net::<f64>(d, delta, &mut RngStream::new(seed, 0), None).unwrap();
        assert!(verify_separation(&net));
        if delta < 1.0 {
            assert!((net.len() as f64).ln() <= log_cardinality_bound(d, delta).unwrap());
        }
    }
}

#[test]
fn audit_of_a_builder_net() {
    let net = build_delta_net::<f64>(2, 0.5, &mut RngStream::new(52, 0), None).unwrap();
    let rep = audit_covering(&net, 100_000, &RngStream::new(53, 0)).unwrap();
    assert_eq!(rep.failures, 0);
    assert!(rep.max_gap <= 0.5);
    assert!(net.len() <= 10_000);
}

#[test]
fn f32_net() {
    let net = build_delta_net::<f32>(2, 0.6, &mut RngStream::new(54, 0), None).unwrap();
    assert!(verify_separation(&net));
    assert_eq!(audit_covering(&net, 5_000, &RngStream::new(55, 0)).unwrap().failures, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distance_ignores_global_phase(seed in any::<u64>(), d in 1usize..=8, theta in -6.3f64..6.3) {
        let mut rng = RngStream::new(seed, 0);
        let x = PureState::random(d, &mut rng).unwrap();
        let y = PureState::random(d, &mut rng).unwrap();
        let a = trace_distance_pure(&x, &y).unwrap();
        let b = trace_distance_pure(&x, &y.with_phase(theta)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((0.0..=2.0).contains(&a));
    }
}
