//! Run configuration loaded from TOML. Every section is optional and defaults
//! to the reference source (air / LiNbO3 stack, 30 mW pump, r = 1,
//! alpha = 1/2). Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bands::CrystalSpec;
use crate::bb84::{AttackModel, DEFAULT_Z_THRESHOLD};
use crate::error::{invalid, Error, Result};
use crate::fock::{SqueezedInput, TruncationPolicy};
use crate::source::{BeamGeometry, PumpSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub input: InputSection,
    pub truncation: TruncationSection,
    pub crystal: CrystalSpec,
    pub pump: PumpSpec,
    pub bands: BandsSection,
    pub sweep: SweepSection,
    pub bb84: Bb84Section,
    pub signal: SignalSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            input: InputSection::default(),
            truncation: TruncationSection::default(),
            crystal: CrystalSpec::lithium_niobate_stack(),
            pump: PumpSpec::reference_pump(),
            bands: BandsSection::default(),
            sweep: SweepSection::default(),
            bb84: Bb84Section::default(),
            signal: SignalSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputSection {
    pub r: f64,
    pub alpha: f64,
}

impl Default for InputSection {
    fn default() -> Self {
        Self { r: 1.0, alpha: 0.5 }
    }
}

/// `n_max` is a floor when `auto` is set: the cutoff is raised until the
/// predicted missing mass fits the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationSection {
    pub n_max: usize,
    pub tail_tolerance: f64,
    pub auto: bool,
}

impl Default for TruncationSection {
    fn default() -> Self {
        let d = TruncationPolicy::default();
        Self {
            n_max: d.n_max(),
            tail_tolerance: d.tail_tolerance(),
            auto: true,
        }
    }
}

impl TruncationSection {
    pub fn policy_for(&self, input: &SqueezedInput) -> Result<TruncationPolicy> {
        if self.auto {
            TruncationPolicy::suggested(input, self.tail_tolerance, self.n_max)
        } else {
            TruncationPolicy::new(self.n_max, self.tail_tolerance)
        }
    }

    pub fn base_policy(&self) -> Result<TruncationPolicy> {
        TruncationPolicy::new(self.n_max, self.tail_tolerance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandsSection {
    pub n_bands: usize,
    /// Number of `k` intervals across `[0, pi / period]`.
    pub n_k: usize,
    /// Band holding the signal frequency.
    pub signal_band: usize,
    pub target_vg_over_c: f64,
}

impl Default for BandsSection {
    fn default() -> Self {
        Self {
            n_bands: 8,
            n_k: 200,
            signal_band: 4,
            target_vg_over_c: 4.59e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub alpha: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            r_min: 0.0,
            r_max: 2.0,
            steps: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Bb84Section {
    pub n_pulses: u64,
    pub attack: AttackModel,
    pub z_threshold: f64,
}

impl Default for Bb84Section {
    fn default() -> Self {
        Self {
            n_pulses: 1_000_000,
            attack: AttackModel::none(),
            z_threshold: DEFAULT_Z_THRESHOLD,
        }
    }
}

/// Weak signal pulse converted to a photon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignalSection {
    /// W
    pub radiant_flux: f64,
    /// m
    pub beam_radius: f64,
    pub refractive_index: f64,
    /// Vacuum wavelength, m.
    pub wavelength: f64,
    /// s
    pub pulse_duration: f64,
    pub volume_geometry: BeamGeometry,
}

impl Default for SignalSection {
    fn default() -> Self {
        Self {
            radiant_flux: 2.0e-7,
            beam_radius: 5.0e-6,
            refractive_index: 1.0,
            wavelength: 1.535e-6,
            pulse_duration: 3.7e-9,
            volume_geometry: BeamGeometry::Square,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        SqueezedInput::new(self.input.r, self.input.alpha)?;
        self.truncation.base_policy()?;
        self.crystal.validate()?;
        self.pump.validate()?;
        let b = &self.bands;
        if b.n_bands == 0 || b.n_k == 0 || b.signal_band == 0 || b.signal_band > b.n_bands {
            return Err(invalid(
                "bands: need n_bands >= 1, n_k >= 1 and 1 <= signal_band <= n_bands",
            ));
        }
        if !(b.target_vg_over_c.is_finite() && b.target_vg_over_c >= 0.0) {
            return Err(invalid("bands: target_vg_over_c must be >= 0"));
        }
        let s = &self.sweep;
        if !(s.r_min >= 0.0 && s.r_max >= s.r_min && s.alpha.is_finite() && s.r_max.is_finite()) {
            return Err(invalid("sweep: need 0 <= r_min <= r_max and finite alpha"));
        }
        if self.bb84.n_pulses == 0 {
            return Err(Error::EmptySession);
        }
        self.bb84.attack.validate()?;
        let sig = &self.signal;
        let positive = [
            sig.radiant_flux,
            sig.beam_radius,
            sig.refractive_index,
            sig.wavelength,
            sig.pulse_duration,
        ]
        .iter()
        .all(|x| x.is_finite() && *x > 0.0);
        if !positive {
            return Err(invalid("signal: all quantities must be > 0"));
        }
        Ok(())
    }

    pub fn squeezed_input(&self) -> Result<SqueezedInput> {
        SqueezedInput::new(self.input.r, self.input.alpha)
    }
}
