//! Net efficiency `W / Q_hot` of multi-tuple engines between nonthermal
//! reservoirs can exceed the extremal-channel bound, even when every hot
//! channel is hotter than every cold channel. A tuple with negative flux can
//! pump heat out of a warm cold-side channel into the hot reservoir at little
//! work cost, cancelling most of the net hot heat.

use carnot_core::bounds::generalized_bound;
use carnot_core::engine::{heat_flows, CouplingOperator, SignCase, Tuple};
use carnot_core::{channel_sign_analysis, DiagonalReservoir};

fn pair() -> (DiagonalReservoir, DiagonalReservoir) {
    let hot = DiagonalReservoir::new("hot", &[0.0, 6.0], &[16.0 / 25.0, 9.0 / 25.0]).unwrap();
    let cold = DiagonalReservoir::new("cold", &[0.0, 2.0, 3.0], &[19.0 / 38.0, 15.0 / 38.0, 4.0 / 38.0]).unwrap();
    (hot, cold)
}

#[test]
fn ordered_pair_with_refrigerating_tuple_exceeds_bound() {
    let (hot, cold) = pair();
    let bound = generalized_bound(&hot, &cold);
    assert!(bound.applicable && bound.strictly_ordered);
    let eta_max = bound.eta_max.unwrap();
    // T_hot = 6 / ln(16/9), coldest cold channel (2, 1) at 1 / ln(15/4)
    let expected = 1.0 - (1.0 / (15.0f64 / 4.0).ln()) / (6.0 / (16.0f64 / 9.0).ln());
    assert!((eta_max - expected).abs() < 1e-14);

    let engine = CouplingOperator::new(1.0)
        .unwrap()
        .with_entry(Tuple::new(1, 0, 1, 2), 1.0)
        .unwrap()
        .with_entry(Tuple::new(1, 0, 0, 1), 1.0)
        .unwrap();
    let heat = heat_flows(&hot, &cold, &engine).unwrap();
    let cases = channel_sign_analysis(&heat);
    assert_eq!(cases[0], (Tuple::new(1, 0, 0, 1), SignCase::Dissipating));
    assert_eq!(cases[1], (Tuple::new(1, 0, 1, 2), SignCase::Extracting));

    // exact rationals: Q_hot = 6 (F1 + F2), W = 4 F1 + 5 F2
    let f1 = (9.0 * 19.0 - 16.0 * 15.0) / 950.0;
    let f2 = (9.0 * 15.0 - 16.0 * 4.0) / 950.0;
    assert!((heat.q_hot - 6.0 * (f1 + f2)).abs() < 1e-15);
    assert!((heat.work - (4.0 * f1 + 5.0 * f2)).abs() < 1e-15);

    let eta = heat.efficiency.unwrap();
    assert!(eta > eta_max + 1.0, "eta {eta} vs bound {eta_max}");
    // the extracting tuple alone respects the bound
    assert!(heat.extracting_efficiency().unwrap() <= eta_max);
}

#[test]
fn extracting_tuple_alone_respects_bound() {
    let (hot, cold) = pair();
    let eta_max = generalized_bound(&hot, &cold).eta_max.unwrap();
    let engine = CouplingOperator::new(1.0).unwrap().with_entry(Tuple::new(1, 0, 1, 2), 1.0).unwrap();
    let eta = heat_flows(&hot, &cold, &engine).unwrap().efficiency.unwrap();
    assert!((eta - 5.0 / 6.0).abs() < 1e-15);
    assert!(eta <= eta_max);
}
