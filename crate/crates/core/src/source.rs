//! Source model: squeeze parameter of the nonlinear crystal and conversions
//! between radiant flux, intensity, field amplitude and photon number.
//!
//! All quantities are SI.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const REDUCED_PLANCK: f64 = 1.054_571_817e-34;

/// CODATA 2018 values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// m/s
    pub c: f64,
    /// F/m
    pub eps0: f64,
    /// J s
    pub hbar: f64,
}

impl PhysicalConstants {
    pub const CODATA: Self = Self {
        c: SPEED_OF_LIGHT,
        eps0: VACUUM_PERMITTIVITY,
        hbar: REDUCED_PLANCK,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// Relative tolerance for a given amplitude to agree with the flux.
pub const AMPLITUDE_CONSISTENCY: f64 = 1e-3;

/// Continuous-wave beam description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSpec {
    /// W
    pub radiant_flux: f64,
    /// m
    pub beam_radius: f64,
    pub refractive_index: f64,
    /// V/m; derived from the flux when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

impl PumpSpec {
    pub fn new(
        radiant_flux: f64,
        beam_radius: f64,
        refractive_index: f64,
        amplitude: Option<f64>,
    ) -> Result<Self> {
        let pump = Self {
            radiant_flux,
            beam_radius,
            refractive_index,
            amplitude,
        };
        pump.validate()?;
        Ok(pump)
    }

    /// 30 mW focused to a 5 um radius in vacuum.
    pub fn reference_pump() -> Self {
        Self {
            radiant_flux: 0.03,
            beam_radius: 5.0e-6,
            refractive_index: 1.0,
            amplitude: None,
        }
    }

    /// Checks positivity and, when an amplitude is given, its agreement with
    /// the flux to [`AMPLITUDE_CONSISTENCY`].
    pub fn validate(&self) -> Result<()> {
        let positive = [self.radiant_flux, self.beam_radius, self.refractive_index]
            .iter()
            .all(|x| x.is_finite() && *x > 0.0);
        if !positive {
            return Err(invalid(
                "pump flux, beam radius and refractive index must be > 0",
            ));
        }
        if let Some(a) = self.amplitude {
            if !(a.is_finite() && a > 0.0) {
                return Err(invalid(format!("pump amplitude must be > 0, got {a}")));
            }
            let derived = flux_to_amplitude_unchecked(self);
            if ((a - derived) / derived).abs() > AMPLITUDE_CONSISTENCY {
                return Err(invalid(format!(
                    "pump amplitude {a:.6e} V/m disagrees with flux-derived {derived:.6e} V/m"
                )));
            }
        }
        Ok(())
    }

    /// The given amplitude, else the one implied by the flux.
    pub fn field_amplitude(&self) -> f64 {
        self.amplitude
            .unwrap_or_else(|| flux_to_amplitude_unchecked(self))
    }
}

/// Cross-section convention for a beam of radius `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamGeometry {
    /// Circular cross-section `pi d^2`.
    Disc,
    /// Square cross-section `d^2`.
    Square,
}

impl BeamGeometry {
    pub fn area(self, radius: f64) -> f64 {
        match self {
            BeamGeometry::Disc => std::f64::consts::PI * radius * radius,
            BeamGeometry::Square => radius * radius,
        }
    }
}

fn require_nonnegative(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and >= 0, got {x}")))
    }
}

fn require_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and > 0, got {x}")))
    }
}

/// `zeta = omega_s A chi2_tilde l_nl / v_g`.
pub fn squeeze_parameter(
    omega_s: f64,
    amplitude: f64,
    chi2_tilde: f64,
    v_g: f64,
    l_nl: f64,
) -> Result<f64> {
    require_positive("signal frequency", omega_s)?;
    require_nonnegative("field amplitude", amplitude)?;
    require_nonnegative("chi2_tilde", chi2_tilde)?;
    require_positive("nonlinear length", l_nl)?;
    require_nonnegative("group velocity", v_g)?;
    if v_g == 0.0 {
        return Err(Error::SingularGroupVelocity);
    }
    Ok(omega_s * amplitude * chi2_tilde * l_nl / v_g)
}

/// Pump amplitude (V/m) that produces squeeze parameter `zeta`.
pub fn amplitude_for_target_squeeze(
    zeta: f64,
    omega_s: f64,
    chi2_tilde: f64,
    v_g: f64,
    l_nl: f64,
) -> Result<f64> {
    require_nonnegative("target squeeze", zeta)?;
    require_positive("signal frequency", omega_s)?;
    require_positive("chi2_tilde", chi2_tilde)?;
    require_positive("nonlinear length", l_nl)?;
    require_nonnegative("group velocity", v_g)?;
    if v_g == 0.0 {
        return Err(Error::SingularGroupVelocity);
    }
    Ok(zeta * v_g / (omega_s * chi2_tilde * l_nl))
}

/// `I = eps0 c n A^2 / 2`, W/m^2.
pub fn intensity_from_amplitude(amplitude: f64, refractive_index: f64) -> f64 {
    0.5 * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT * refractive_index * amplitude * amplitude
}

/// Inverse of [`intensity_from_amplitude`].
pub fn amplitude_from_intensity(intensity: f64, refractive_index: f64) -> f64 {
    (2.0 * intensity / (VACUUM_PERMITTIVITY * SPEED_OF_LIGHT * refractive_index)).sqrt()
}

/// `I = W / area`.
pub fn intensity_from_flux(radiant_flux: f64, beam_radius: f64, geometry: BeamGeometry) -> f64 {
    radiant_flux / geometry.area(beam_radius)
}

fn flux_to_amplitude_unchecked(pump: &PumpSpec) -> f64 {
    let intensity = intensity_from_flux(pump.radiant_flux, pump.beam_radius, BeamGeometry::Disc);
    amplitude_from_intensity(intensity, pump.refractive_index)
}

/// `A = sqrt(2 W / (pi d^2 eps0 c n))`, V/m.
pub fn flux_to_amplitude(pump: &PumpSpec) -> Result<f64> {
    let bare = PumpSpec {
        amplitude: None,
        ..*pump
    };
    bare.validate()?;
    Ok(flux_to_amplitude_unchecked(pump))
}

/// Volume of a pulse of duration `tau` (s) and radius `d` (m): `c tau` times
/// the cross-section.
pub fn pulse_volume(tau: f64, beam_radius: f64, geometry: BeamGeometry) -> f64 {
    SPEED_OF_LIGHT * tau * geometry.area(beam_radius)
}

/// `N = 2 eps0 V A^2 / (hbar omega)`.
pub fn photon_number(amplitude: f64, omega: f64, volume: f64) -> Result<f64> {
    require_nonnegative("field amplitude", amplitude)?;
    require_positive("angular frequency", omega)?;
    require_nonnegative("volume", volume)?;
    Ok(amplitude * amplitude * 2.0 * VACUUM_PERMITTIVITY * volume / (REDUCED_PLANCK * omega))
}

/// Angular frequency (rad/s) of vacuum wavelength `lambda` (m).
pub fn omega_from_wavelength(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / lambda
}
