//! P(1,1), P1 and P(1) against the squeeze magnitude at alpha = 1/2.

use squeezed_pairs::fock::TruncationPolicy;
use squeezed_pairs::stats::{linspace, sweep_maxima, sweep_r};

fn main() -> squeezed_pairs::Result<()> {
    let trunc = TruncationPolicy::default();
    let rows = sweep_r(0.5, &linspace(0.0, 2.0, 20), &trunc);
    println!("{:>6} {:>9} {:>9} {:>9}", "r", "P(1,1)", "P1", "P(1)");
    for row in &rows {
        let v = row.values.as_ref().map_err(Clone::clone)?;
        println!(
            "{:>6.2} {:>9.5} {:>9.5} {:>9.5}",
            row.r, v.p11, v.p1, v.p_single
        );
    }

    let m = sweep_maxima(0.5, 0.0, 2.0, 200, &trunc)?;
    println!("max P(1,1) = {:.5} at r = {:.4}", m.p11.value, m.p11.r);
    println!("max P1     = {:.5} at r = {:.4}", m.p1.value, m.p1.r);
    Ok(())
}
