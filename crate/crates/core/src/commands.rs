//! The CLI commands as library calls. Each command computes its results and
//! returns the files to write plus a JSON summary; writing is left to
//! [`CommandOutput::write_to`] so it happens on one thread.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::acceptance::{self, CriterionResult};
use crate::bands::{
    band_structure, tune_to_group_velocity, BandSolution, CrystalSpec, TuningReport,
    DISPERSION_FORM_NOTE,
};
use crate::bb84::{simulate_session_with_threshold, SessionReport};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fock::{oracle_state, output_amplitudes, AmplitudeMatrix};
use crate::report::{bands_csv, joint_csv, sweep_csv, to_json};
use crate::source::{
    amplitude_for_target_squeeze, flux_to_amplitude, omega_from_wavelength, photon_number,
    pulse_volume, squeeze_parameter, PumpSpec, SPEED_OF_LIGHT,
};
use crate::stats::{
    heralded_stats, joint_distribution, linspace, sweep_maxima, sweep_r, threshold_probs,
    HeraldedStats, SweepMaxima, ThresholdProbs,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    /// Pretty JSON, also written as one of the artifacts.
    pub summary: String,
    pub artifacts: Vec<Artifact>,
}

impl CommandOutput {
    fn new(summary: String, summary_name: &str, mut artifacts: Vec<Artifact>) -> Self {
        artifacts.push(Artifact {
            file_name: summary_name.to_string(),
            contents: summary.clone(),
        });
        Self { summary, artifacts }
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.artifacts.len());
        for a in &self.artifacts {
            let path = dir.join(&a.file_name);
            std::fs::write(&path, &a.contents)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn artifact(file_name: &str, contents: String) -> Artifact {
    Artifact {
        file_name: file_name.to_string(),
        contents,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistSummary {
    pub r: f64,
    pub alpha: f64,
    pub n_max: usize,
    pub captured_mass: f64,
    pub p00: f64,
    pub p11: f64,
    pub p13: f64,
    /// `None` when no `n1 = 1` events exist (vacuum input).
    pub heralded: Option<HeraldedStats>,
    pub thresholds: ThresholdProbs,
    /// Largest `|P_closed - P_oracle|` over the box, when requested.
    pub oracle_max_abs_diff: Option<f64>,
}

/// Joint distribution CSV and heralded statistics for the configured input.
pub fn dist(config: &RunConfig, with_oracle: bool) -> Result<CommandOutput> {
    let input = config.squeezed_input()?;
    let trunc = config.truncation.policy_for(&input)?;
    let jd = joint_distribution(&input, &trunc)?;
    let heralded = match heralded_stats(&jd) {
        Ok(h) => Some(h),
        Err(Error::NoHeraldEvents) => None,
        Err(e) => return Err(e),
    };
    let oracle_max_abs_diff = if with_oracle {
        let closed = output_amplitudes(&input, &trunc)?;
        let oracle = oracle_state(&input, &trunc)?;
        Some(max_probability_diff(&closed, &oracle))
    } else {
        None
    };
    let at = |n1: usize, n2: usize| {
        if n1.max(n2) <= jd.n_max() {
            jd.get(n1, n2)
        } else {
            0.0
        }
    };
    let summary = DistSummary {
        r: input.r(),
        alpha: input.alpha(),
        n_max: jd.n_max(),
        captured_mass: jd.captured_mass(),
        p00: at(0, 0),
        p11: at(1, 1),
        p13: at(1, 3),
        heralded,
        thresholds: threshold_probs(&jd)?,
        oracle_max_abs_diff,
    };
    Ok(CommandOutput::new(
        to_json(&summary),
        "dist.json",
        vec![artifact("joint.csv", joint_csv(&jd))],
    ))
}

pub fn max_probability_diff(a: &AmplitudeMatrix, b: &AmplitudeMatrix) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x * x - y * y).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub alpha: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub failed_points: usize,
    pub maxima: SweepMaxima,
}

/// `P(1,1)`, `P_1` and `P(1)` over the configured `r` grid, plus refined
/// maxima.
pub fn sweep(config: &RunConfig) -> Result<CommandOutput> {
    let s = &config.sweep;
    let trunc = config.truncation.base_policy()?;
    let grid = linspace(s.r_min, s.r_max, s.steps);
    let rows = sweep_r(s.alpha, &grid, &trunc);
    let maxima = sweep_maxima(s.alpha, s.r_min, s.r_max, s.steps, &trunc)?;
    let summary = SweepSummary {
        alpha: s.alpha,
        r_min: s.r_min,
        r_max: s.r_max,
        points: rows.len(),
        failed_points: rows.iter().filter(|r| r.values.is_err()).count(),
        maxima,
    };
    Ok(CommandOutput::new(
        to_json(&summary),
        "sweep.json",
        vec![artifact("sweep.csv", sweep_csv(&rows))],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandEdge {
    pub band_index: usize,
    pub omega_tilde_at_k0: f64,
    pub omega_tilde_at_zone_edge: f64,
    pub omega_at_k0: f64,
    pub omega_at_zone_edge: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frequencies {
    pub band_index: Option<usize>,
    pub omega: f64,
    pub omega_tilde: f64,
    pub nu: f64,
    /// Vacuum wavelength, m.
    pub wavelength: f64,
}

impl Frequencies {
    fn new(spec: &CrystalSpec, omega: f64, band_index: Option<usize>) -> Self {
        Self {
            band_index,
            omega,
            omega_tilde: spec.omega_to_tilde(omega),
            nu: omega / (2.0 * PI),
            wavelength: 2.0 * PI * SPEED_OF_LIGHT / omega,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezeReport {
    pub omega_s: f64,
    pub vg: f64,
    pub vg_over_c: f64,
    pub pump_amplitude: f64,
    /// Pump amplitude for `zeta = 1` at this group velocity.
    pub amplitude_for_unit_zeta: f64,
    /// `amplitude_for_unit_zeta / (vg / c)`.
    pub unit_zeta_slope: f64,
    pub zeta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandsSummary {
    pub n_bands: usize,
    pub n_k: usize,
    pub edges: Vec<BandEdge>,
    /// Signal at the `k = 0` edge of the signal band.
    pub signal: Frequencies,
    /// `omega_p = 2 omega_s`; `band_index` is the band whose range holds it.
    pub pump: Frequencies,
    pub dispersion_note: String,
    pub tuning: TuningReport,
    pub squeeze: SqueezeReport,
}

/// Band diagram CSV, band edges, signal and pump frequencies, tuning and the
/// end-to-end squeeze magnitude.
pub fn bands(config: &RunConfig) -> Result<CommandOutput> {
    let spec = &config.crystal;
    let b = &config.bands;
    let solutions = band_structure(spec, b.n_bands, b.n_k)?;
    let edges: Vec<BandEdge> = solutions
        .iter()
        .map(|s| BandEdge {
            band_index: s.band_index,
            omega_tilde_at_k0: spec.omega_to_tilde(s.edges.0),
            omega_tilde_at_zone_edge: spec.omega_to_tilde(s.edges.1),
            omega_at_k0: s.edges.0,
            omega_at_zone_edge: s.edges.1,
        })
        .collect();
    let omega_s = solutions[b.signal_band - 1].edges.0;
    let omega_p = 2.0 * omega_s;
    let pump_band = band_containing(&solutions, spec.omega_to_tilde(omega_p));
    let tuning = tune_to_group_velocity(spec, b.signal_band, b.target_vg_over_c * SPEED_OF_LIGHT)?;
    let squeeze = squeeze_report(spec, &config.pump, tuning.omega_edge, b.target_vg_over_c)?;
    let summary = BandsSummary {
        n_bands: b.n_bands,
        n_k: b.n_k,
        edges,
        signal: Frequencies::new(spec, omega_s, Some(b.signal_band)),
        pump: Frequencies::new(spec, omega_p, pump_band),
        dispersion_note: DISPERSION_FORM_NOTE.to_string(),
        tuning,
        squeeze,
    };
    Ok(CommandOutput::new(
        to_json(&summary),
        "bands.json",
        vec![artifact("bands.csv", bands_csv(&solutions))],
    ))
}

/// Band whose sampled range contains `w`.
pub fn band_containing(solutions: &[BandSolution], w: f64) -> Option<usize> {
    solutions.iter().find_map(|s| {
        let (lo, hi) = s
            .samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x.omega_tilde), hi.max(x.omega_tilde))
            });
        (lo <= w && w <= hi).then_some(s.band_index)
    })
}

pub fn squeeze_report(
    spec: &CrystalSpec,
    pump: &PumpSpec,
    omega_s: f64,
    vg_over_c: f64,
) -> Result<SqueezeReport> {
    let vg = vg_over_c * SPEED_OF_LIGHT;
    let pump_amplitude = pump.field_amplitude();
    let amplitude_for_unit_zeta =
        amplitude_for_target_squeeze(1.0, omega_s, spec.chi2_tilde, vg, spec.l_nl)?;
    Ok(SqueezeReport {
        omega_s,
        vg,
        vg_over_c,
        pump_amplitude,
        amplitude_for_unit_zeta,
        unit_zeta_slope: amplitude_for_unit_zeta / vg_over_c,
        zeta: squeeze_parameter(omega_s, pump_amplitude, spec.chi2_tilde, vg, spec.l_nl)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalPulse {
    pub amplitude: f64,
    pub omega: f64,
    pub volume: f64,
    pub photon_number: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TuneSummary {
    pub tuning: TuningReport,
    /// Reading with the signal frequency held at the band edge.
    pub fixed_omega_s: Frequencies,
    /// Reading from the band at the tuned `k`.
    pub dispersion: Frequencies,
    pub squeeze: SqueezeReport,
    pub signal_pulse: SignalPulse,
}

/// Group-velocity tuning on the signal band, with both frequency readings,
/// the squeeze magnitude it implies and the weak-pulse photon number.
pub fn tune(config: &RunConfig) -> Result<CommandOutput> {
    let spec = &config.crystal;
    let b = &config.bands;
    let tuning = tune_to_group_velocity(spec, b.signal_band, b.target_vg_over_c * SPEED_OF_LIGHT)?;
    let squeeze = squeeze_report(spec, &config.pump, tuning.omega_edge, b.target_vg_over_c)?;
    let summary = TuneSummary {
        tuning,
        fixed_omega_s: Frequencies::new(spec, tuning.omega_edge, Some(b.signal_band)),
        dispersion: Frequencies::new(spec, tuning.omega_at_k_star, Some(b.signal_band)),
        squeeze,
        signal_pulse: signal_pulse(config)?,
    };
    Ok(CommandOutput::new(
        to_json(&summary),
        "tune.json",
        Vec::new(),
    ))
}

pub fn signal_pulse(config: &RunConfig) -> Result<SignalPulse> {
    let s = &config.signal;
    let pulse = PumpSpec::new(s.radiant_flux, s.beam_radius, s.refractive_index, None)?;
    let amplitude = flux_to_amplitude(&pulse)?;
    let omega = omega_from_wavelength(s.wavelength);
    let volume = pulse_volume(s.pulse_duration, s.beam_radius, s.volume_geometry);
    Ok(SignalPulse {
        amplitude,
        omega,
        volume,
        photon_number: photon_number(amplitude, omega, volume)?,
    })
}

/// Monte Carlo BB84 session on the configured source.
pub fn bb84(config: &RunConfig) -> Result<SessionReport> {
    let input = config.squeezed_input()?;
    let trunc = config.truncation.policy_for(&input)?;
    let jd = joint_distribution(&input, &trunc)?;
    let b = &config.bb84;
    simulate_session_with_threshold(&jd, b.n_pulses, &b.attack, config.seed, b.z_threshold)
}

pub fn bb84_output(config: &RunConfig) -> Result<CommandOutput> {
    let report = bb84(config)?;
    Ok(CommandOutput::new(
        to_json(&report),
        "bb84.json",
        Vec::new(),
    ))
}

/// Runs every acceptance criterion; the text is one line per criterion.
pub fn selftest() -> (Vec<CriterionResult>, String) {
    let results = acceptance::run_all();
    let table = acceptance::format_table(&results);
    (results, table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> RunConfig {
        let mut c = RunConfig::default();
        c.bands.n_k = 8;
        c.sweep.steps = 4;
        c.bb84.n_pulses = 2000;
        c
    }

    #[test]
    fn dist_reports_reference_point() {
        let out = dist(&quick_config(), false).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.summary).unwrap();
        assert!((v["heralded"]["p1"].as_f64().unwrap() - 0.151).abs() < 0.002);
        assert!((v["heralded"]["g2"].as_f64().unwrap() - 1.17).abs() < 0.02);
        assert!(v["oracle_max_abs_diff"].is_null());
        assert_eq!(out.artifacts.len(), 2);
    }

    #[test]
    fn dist_of_vacuum_has_no_herald() {
        let mut c = quick_config();
        c.input.r = 0.0;
        c.input.alpha = 0.0;
        let out = dist(&c, false).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.summary).unwrap();
        assert_eq!(v["p00"].as_f64().unwrap(), 1.0);
        assert!(v["heralded"].is_null());
    }

    #[test]
    fn explicit_small_cutoff_fails_with_truncation() {
        let mut c = quick_config();
        c.truncation.auto = false;
        c.truncation.n_max = 5;
        assert_eq!(dist(&c, false).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn zero_width_sweep_has_one_row() {
        let mut c = quick_config();
        c.sweep.r_min = 0.5;
        c.sweep.r_max = 0.5;
        let out = sweep(&c).unwrap();
        let csv = &out.artifacts[0].contents;
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("0.500000000000,"));
    }

    #[test]
    fn outputs_are_reproducible() {
        let c = quick_config();
        assert_eq!(bb84_output(&c).unwrap(), bb84_output(&c).unwrap());
        assert_eq!(sweep(&c).unwrap(), sweep(&c).unwrap());
    }

    #[test]
    fn pump_lands_in_band_eight() {
        let out = bands(&quick_config()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.summary).unwrap();
        assert_eq!(v["pump"]["band_index"].as_u64(), Some(8));
        assert!((v["squeeze"]["zeta"].as_f64().unwrap() - 1.0).abs() < 0.005);
    }
}
