//! Closed-form amplitudes against a brute-force matrix exponential of the
//! squeeze and beam-splitter generators.

use squeezed_pairs::fock::{oracle_state, output_amplitudes, SqueezedInput, TruncationPolicy};

fn main() -> squeezed_pairs::Result<()> {
    for (r, alpha) in [(0.5, 0.5), (1.0, 0.5), (1.5, 1.0)] {
        let input = SqueezedInput::new(r, alpha)?;
        let trunc = TruncationPolicy::auto(&input)?;
        let closed = output_amplitudes(&input, &trunc)?;
        let oracle = oracle_state(&input, &trunc)?;
        println!(
            "r = {r}, alpha = {alpha}: n_max = {}, max |diff| = {:.2e}, mass = {:.10}",
            trunc.n_max(),
            closed.max_abs_diff(&oracle, trunc.n_max()),
            closed.captured_mass()
        );
    }
    Ok(())
}
