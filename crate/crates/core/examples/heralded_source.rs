//! Heralded single photons: condition port 2 on one photon at port 1.

use squeezed_pairs::fock::{SqueezedInput, TruncationPolicy};
use squeezed_pairs::stats::{heralded_stats, joint_distribution, threshold_probs};

fn main() -> squeezed_pairs::Result<()> {
    let input = SqueezedInput::new(1.0, 0.5)?;
    let jd = joint_distribution(&input, &TruncationPolicy::auto(&input)?)?;
    let h = heralded_stats(&jd)?;

    println!("P1 (herald probability) = {:.5}", h.p1);
    for (n, p) in h.pn.iter().take(7).enumerate() {
        println!("  P({n}) = {p:.5}");
    }
    println!("g2(0) = {:.4}", h.g2);

    let q = threshold_probs(&jd)?;
    println!("Q1 = {:.4}, Q2 = {:.4}, Q3 = {:.4}", q.q1, q.q2, q.q3);
    println!(
        "miss: {:.4} clean, {:.4} under a 50-50 tap",
        q.baseline_miss, q.attacked_miss
    );
    Ok(())
}
