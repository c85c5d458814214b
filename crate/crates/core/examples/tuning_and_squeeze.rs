//! Slow light near the band-4 edge: find k for a target group velocity, then
//! the squeeze magnitude the 30 mW pump produces there.

use squeezed_pairs::bands::{group_velocity, tune_to_group_velocity, CrystalSpec};
use squeezed_pairs::source::{
    amplitude_for_target_squeeze, flux_to_amplitude, squeeze_parameter, PumpSpec, SPEED_OF_LIGHT,
};

fn main() -> squeezed_pairs::Result<()> {
    let spec = CrystalSpec::lithium_niobate_stack();
    let target = 4.59e-3 * SPEED_OF_LIGHT;
    let t = tune_to_group_velocity(&spec, 4, target)?;
    println!("period * k* = {:.4e}", t.k_star_tilde);
    println!(
        "v_g(k*)/c   = {:.4e}",
        group_velocity(&spec, 4, t.k_star)? / SPEED_OF_LIGHT
    );
    println!(
        "nu_s = {:.4e} Hz, delta nu = {:.4e} Hz ({:.3e} of nu_s)",
        t.nu_s, t.delta_nu, t.delta_nu_over_nu_s
    );

    let amplitude = flux_to_amplitude(&PumpSpec::reference_pump())?;
    let zeta = squeeze_parameter(t.omega_edge, amplitude, spec.chi2_tilde, target, spec.l_nl)?;
    let unit = amplitude_for_target_squeeze(1.0, t.omega_edge, spec.chi2_tilde, target, spec.l_nl)?;
    println!("pump amplitude = {amplitude:.4e} V/m, amplitude for zeta = 1: {unit:.4e} V/m");
    println!("zeta = {zeta:.4}");
    Ok(())
}
