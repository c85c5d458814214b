//! BB84 with a heralded source: a beam-splitting eavesdropper shows up as
//! extra heralds with no photon at Bob.

use squeezed_pairs::bb84::{expected_miss_given_herald, simulate_session, AttackModel};
use squeezed_pairs::fock::{SqueezedInput, TruncationPolicy};
use squeezed_pairs::stats::joint_distribution;

fn main() -> squeezed_pairs::Result<()> {
    let input = SqueezedInput::new(1.0, 0.5)?;
    let jd = joint_distribution(&input, &TruncationPolicy::auto(&input)?)?;

    for ratio in [0.0, 0.1, 0.5] {
        let attack = if ratio > 0.0 {
            AttackModel::beam_splitter(ratio)?
        } else {
            AttackModel::none()
        };
        let report = simulate_session(&jd, 200_000, &attack, 7)?;
        println!(
            "tap {ratio:.1}: miss/herald {:.4} (expected {:.4}), z = {:+.1}, {:?}",
            report.bob_miss_given_herald,
            expected_miss_given_herald(&jd, &attack)?,
            report.z_score.unwrap_or(f64::NAN),
            report.verdict
        );
    }
    Ok(())
}
