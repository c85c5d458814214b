//! Conduction bands of the air / LiNbO3 stack and the signal and pump
//! frequencies that sit on them.

use std::f64::consts::PI;

use squeezed_pairs::bands::{band_structure, CrystalSpec};
use squeezed_pairs::source::SPEED_OF_LIGHT;

fn main() -> squeezed_pairs::Result<()> {
    let spec = CrystalSpec::lithium_niobate_stack();
    let bands = band_structure(&spec, 8, 100)?;

    println!("band  w(k=0)   w(k=pi/L)  max vg/c");
    for b in &bands {
        let vmax = b.samples.iter().map(|s| s.vg_over_c).fold(0.0, f64::max);
        println!(
            "{:>4}  {:.5}  {:.5}    {:.4}",
            b.band_index,
            spec.omega_to_tilde(b.edges.0),
            spec.omega_to_tilde(b.edges.1),
            vmax
        );
    }

    let omega_s = bands[3].edges.0;
    let lambda_s = 2.0 * PI * SPEED_OF_LIGHT / omega_s;
    println!("signal: omega_s = {omega_s:.4e} rad/s, lambda_s = {lambda_s:.4e} m");
    println!(
        "pump:   omega_p = 2 omega_s, lambda_p = {:.4e} m",
        lambda_s / 2.0
    );
    Ok(())
}
