use squeezed_pairs::bb84::{
    expected_miss_given_herald, expected_miss_joint, simulate_session, simulate_tally, AttackModel,
    Verdict,
};
use squeezed_pairs::fock::{SqueezedInput, TruncationPolicy};
use squeezed_pairs::stats::{joint_distribution, threshold_probs, JointDistribution};

fn reference() -> JointDistribution {
    let input = SqueezedInput::new(1.0, 0.5).unwrap();
    joint_distribution(&input, &TruncationPolicy::auto(&input).unwrap()).unwrap()
}

fn within_sigmas(count: u64, n: u64, p: f64, sigmas: f64) -> bool {
    let expected = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - expected).abs() <= sigmas * sd
}

#[test]
fn sampled_cells_follow_the_distribution() {
    let jd = reference();
    let n = 1_000_000;
    let tally = simulate_tally(&jd, n, &AttackModel::none(), 11).unwrap();
    let side = jd.n_max() + 1;
    for n1 in 0..side {
        for n2 in 0..side {
            let p = jd.get(n1, n2);
            if p > 1e-4 {
                let count = tally.joint_counts[n1 * side + n2];
                assert!(
                    within_sigmas(count, n, p, 4.0),
                    "({n1},{n2}): {count} vs {}",
                    p * n as f64
                );
            }
        }
    }
}

#[test]
fn clean_miss_rate_matches_closed_form() {
    let jd = reference();
    let q = threshold_probs(&jd).unwrap();
    let report = simulate_session(&jd, 1_000_000, &AttackModel::none(), 3).unwrap();
    let p = (q.q1 - q.q2) / q.q1;
    let misses = report.herald_count - report.bob_detect_count;
    assert!(within_sigmas(misses, report.herald_count, p, 4.0));
    assert!(within_sigmas(report.herald_count, 1_000_000, q.q1, 4.0));
    assert_eq!(report.verdict, Verdict::Clean);
}

#[test]
fn balanced_attack_is_flagged() {
    let jd = reference();
    let attack = AttackModel::beam_splitter(0.5).unwrap();
    let report = simulate_session(&jd, 100_000, &attack, 5).unwrap();
    assert_eq!(report.verdict, Verdict::AttackSuspected);
    assert!(report.z_score.unwrap() > 5.0);
    let expected = expected_miss_given_herald(&jd, &attack).unwrap();
    let misses = report.herald_count - report.bob_detect_count;
    assert!(within_sigmas(misses, report.herald_count, expected, 4.0));
}

#[test]
fn misses_grow_with_the_tapped_fraction() {
    let jd = reference();
    let mut last = 0;
    for ratio in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let attack = AttackModel::beam_splitter(ratio).unwrap();
        // shared seed: the same cells and uniforms, only the threshold moves
        let t = simulate_tally(&jd, 200_000, &attack, 17).unwrap();
        let misses = t.bob_miss_count();
        assert!(misses >= last, "ratio {ratio}: {misses} < {last}");
        last = misses;
    }
    let all = simulate_tally(&jd, 200_000, &AttackModel::beam_splitter(1.0).unwrap(), 17).unwrap();
    assert_eq!(all.bob_detect_count, 0);
}

#[test]
fn single_photon_misses_carry_half_of_q3() {
    let jd = reference();
    let q = threshold_probs(&jd).unwrap();
    let n = 1_000_000;
    let attack = AttackModel::beam_splitter(0.5).unwrap();
    let t = simulate_tally(&jd, n, &attack, 23).unwrap();
    assert!(within_sigmas(t.miss_by_n2[1], n, q.q3 / 2.0, 4.0));
    let joint = expected_miss_joint(&jd, &attack);
    assert!(
        joint > q.attacked_miss,
        "multi-photon taps add to the single-photon shift"
    );
}
