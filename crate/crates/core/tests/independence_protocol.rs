mod common;

use common::*;
use dtp_core::independence::{
    decode_one_way_message, encode_one_way_message, one_way_it2p, predicted_one_way_bits, usi_pmf, ITParams,
    IndependenceFamily, OneWayMessage, OneWayRepetition,
};
use dtp_core::rng::{derive_seed, stream};

#[test]
fn rates_and_evaluator_agreement() {
    let s = independence(20, 2560, 2, 60, 31, fixture());
    assert_eq!(s.agreement, 1.0);
    assert!(s.rates.accept >= 0.7 && s.rates.reject >= 0.7);
}

#[test]
fn intersection_law_matches_direct_intersection() {
    assert!(subset_intersection_p(8, 4, 4, 100_000, 32) > 0.01);
}

#[test]
fn intersection_pmf_small_case() {
    // |Γ ∩ U| for |Γ| = |U| = 2 in [4]: 1/6, 4/6, 1/6.
    let pmf = usi_pmf(4, 2, 2);
    for (got, want) in pmf.iter().zip([1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn subset_mass_is_proportional() {
    assert!(subset_mass_containment(1000, 500, 33) >= 0.9);
}

#[test]
fn conditioned_product_is_exact() {
    assert_eq!(product_conditioning_mismatches(100, 34), 0);
}

#[test]
fn conditioned_diagonal_stays_far() {
    assert!(diagonal_gap_rate(20, 2560, 200, 35, fixture()) >= 0.9);
}

#[test]
fn one_way_agreement_and_size() {
    let params = ITParams::new(20, 20, 2560, 1.0, 2, fixture().independence).unwrap();
    let mut rng = stream(36);
    let (mut ok, mut total, mut worst) = (0, 0, 0.0f64);
    for trial in 0..60u64 {
        for family in [IndependenceFamily::Product, IndependenceFamily::Diagonal] {
            let joint = family.instance(20, 20).unwrap().sample(2560, &mut rng);
            let out = one_way_it2p(&joint, &params, derive_seed(36, &[trial])).unwrap();
            ok += (out.verdict.decision == family.expected()) as usize;
            total += 1;
            let ratio = out.verdict.transcript.total_bits() as f64 / predicted_one_way_bits(&params);
            worst = worst.max(ratio.max(1.0 / ratio));
        }
    }
    assert!(ok as f64 / total as f64 >= 0.9, "{ok}/{total}");
    assert!(worst <= 4.0, "bits off by {worst}");
}

#[test]
fn empty_repetition_carries_only_lambda() {
    let msg = OneWayMessage { t: 100, repetitions: vec![OneWayRepetition { split_alphabet: 0, samples: vec![] }] };
    let bytes = encode_one_way_message(&msg);
    // 16-bit K, 32-bit t, 32-bit λ.
    assert_eq!(bytes.len(), 10);
    assert_eq!(decode_one_way_message(&bytes).unwrap(), msg);
}
