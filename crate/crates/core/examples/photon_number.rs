//! Field amplitude and photon number of a weak 200 nW, 3.7 ns signal pulse.

use squeezed_pairs::source::{
    flux_to_amplitude, intensity_from_amplitude, omega_from_wavelength, photon_number,
    pulse_volume, BeamGeometry, PumpSpec,
};

fn main() -> squeezed_pairs::Result<()> {
    let beam = PumpSpec::new(2.0e-7, 5.0e-6, 1.0, None)?;
    let amplitude = flux_to_amplitude(&beam)?;
    let omega = omega_from_wavelength(1.535e-6);
    println!(
        "amplitude = {amplitude:.4e} V/m, intensity = {:.4e} W/m^2",
        intensity_from_amplitude(amplitude, 1.0)
    );
    for geometry in [BeamGeometry::Square, BeamGeometry::Disc] {
        let volume = pulse_volume(3.7e-9, 5.0e-6, geometry);
        println!(
            "{geometry:?} volume: N = {:.4e}",
            photon_number(amplitude, omega, volume)?
        );
    }
    Ok(())
}
