//! Joint photon-number distribution of the two output ports at r = 1,
//! alpha = 1/2, printed as a small table.

use squeezed_pairs::fock::{SqueezedInput, TruncationPolicy};
use squeezed_pairs::stats::joint_distribution;

fn main() -> squeezed_pairs::Result<()> {
    let input = SqueezedInput::new(1.0, 0.5)?;
    let trunc = TruncationPolicy::auto(&input)?;
    let jd = joint_distribution(&input, &trunc)?;
    println!(
        "n_max = {}, captured mass = {:.10}",
        jd.n_max(),
        jd.captured_mass()
    );

    print!("n1\\n2");
    for n2 in 0..6 {
        print!("{n2:>9}");
    }
    println!();
    for n1 in 0..6 {
        print!("{n1:>5}");
        for n2 in 0..6 {
            print!("{:>9.5}", jd.get(n1, n2));
        }
        println!();
    }
    Ok(())
}
