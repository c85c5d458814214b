use proptest::prelude::*;
use squeezed_pairs::fock::{SqueezedInput, TruncationPolicy};
use squeezed_pairs::stats::{
    heralded_stats, joint_distribution, linspace, sweep_maxima, sweep_point, sweep_r,
    threshold_probs,
};

#[test]
fn sweep_peaks_at_alpha_half() {
    let m = sweep_maxima(0.5, 0.0, 2.0, 200, &TruncationPolicy::default()).unwrap();
    assert!((m.p11.value - 0.0799).abs() < 0.002, "{:?}", m.p11);
    assert!((m.p11.r - 0.85).abs() < 0.01, "{:?}", m.p11);
    assert!((m.p1.value - 0.165).abs() < 0.002, "{:?}", m.p1);
    assert!((m.p1.r - 0.675).abs() < 0.01, "{:?}", m.p1);
}

#[test]
fn single_photon_fraction_rises_with_squeezing() {
    let rows = sweep_r(0.5, &linspace(0.0, 2.0, 200), &TruncationPolicy::default());
    let p: Vec<f64> = rows
        .iter()
        .map(|r| r.values.as_ref().unwrap().p_single)
        .collect();
    for w in p.windows(2) {
        assert!(w[1] > w[0], "{} then {}", w[0], w[1]);
    }
}

#[test]
fn sweep_matches_full_distribution() {
    for r in [0.0, 0.4, 1.3] {
        let input = SqueezedInput::new(r, 0.5).unwrap();
        let jd = joint_distribution(&input, &TruncationPolicy::auto(&input).unwrap()).unwrap();
        let h = heralded_stats(&jd).unwrap();
        let v = sweep_point(0.5, r, &TruncationPolicy::default()).unwrap();
        assert!((v.p11 - jd.get(1, 1)).abs() < 1e-12);
        assert!((v.p1 - h.p1).abs() < 1e-8);
        assert!((v.p_single - h.pn[1]).abs() < 1e-8);
    }
}

#[test]
fn coherent_light_has_unit_g2() {
    // without squeezing the ports hold independent coherent states
    let input = SqueezedInput::new(0.0, 1.2).unwrap();
    let jd = joint_distribution(&input, &TruncationPolicy::auto(&input).unwrap()).unwrap();
    let h = heralded_stats(&jd).unwrap();
    assert!((h.g2 - 1.0).abs() < 1e-8, "{}", h.g2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn heralded_distribution_is_normalized(r in 0.0..1.5f64, alpha in 0.05..1.0f64) {
        let input = SqueezedInput::new(r, alpha).unwrap();
        let jd = joint_distribution(&input, &TruncationPolicy::auto(&input).unwrap()).unwrap();
        let h = heralded_stats(&jd).unwrap();
        prop_assert!((h.pn.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(h.pn.iter().all(|p| *p >= 0.0));
        prop_assert!(h.g2 >= 0.0);
    }

    #[test]
    fn threshold_ordering(r in 0.0..1.5f64, alpha in 0.0..1.0f64) {
        let input = SqueezedInput::new(r, alpha).unwrap();
        let jd = joint_distribution(&input, &TruncationPolicy::auto(&input).unwrap()).unwrap();
        let q = threshold_probs(&jd).unwrap();
        prop_assert!(q.q1 <= 1.0 + 1e-12);
        prop_assert!(q.q2 <= q.q1);
        prop_assert!(q.q3 <= q.q1);
        prop_assert!((q.attacked_miss - q.baseline_miss - q.q3 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn pair_probability_below_herald_probability(r in 0.0..2.0f64, alpha in 0.0..1.0f64) {
        let v = sweep_point(alpha, r, &TruncationPolicy::default()).unwrap();
        prop_assert!(v.p11 <= v.p1 + 1e-15);
        prop_assert!((0.0..=1.0).contains(&v.p_single));
    }
}
