//! Reference-value acceptance suite, shared by `selftest` and the
//! `acceptance` test target.

use std::fmt::{self, Write as _};

use crate::bands::{band_frequencies_tilde, band_structure, tune_to_group_velocity, CrystalSpec};
use crate::bb84::{
    expected_miss_given_herald, simulate_session_with_threshold, AttackModel, Verdict,
};
use crate::commands::{band_containing, squeeze_report};
use crate::error::Result;
use crate::fock::{oracle_state, output_amplitudes, SqueezedInput, TruncationPolicy};
use crate::source::{
    flux_to_amplitude, omega_from_wavelength, photon_number, pulse_volume, BeamGeometry, PumpSpec,
    SPEED_OF_LIGHT,
};
use crate::stats::{
    heralded_stats, joint_distribution, sweep_maxima, threshold_probs, JointDistribution,
};

pub mod tolerances {
    /// Probabilities, absolute.
    pub const PROBABILITY: f64 = 0.002;
    /// Heralded `g2(0)`, absolute.
    pub const G2: f64 = 0.02;
    /// Location of a sweep maximum in `r`, absolute.
    pub const PEAK_LOCATION: f64 = 0.01;
    /// Normalized band-edge frequency, absolute.
    pub const BAND_EDGE: f64 = 0.01;
    /// Physical quantities, relative.
    pub const PHYSICAL: f64 = 0.01;
    /// Tuning chain, relative.
    pub const TUNING: f64 = 0.02;
    /// Closed form against the oracle, per amplitude.
    pub const ORACLE: f64 = 1e-8;
    /// Missing or excess probability mass.
    pub const NORMALIZATION: f64 = 1e-8;
    /// `|P(n1, n2) - P(n2, n1)|`.
    pub const MODE_SWAP: f64 = 1e-12;
    /// Binomial standard deviations for the clean miss rate.
    pub const MONTE_CARLO_SIGMAS: f64 = 4.0;
    pub const Z_THRESHOLD: f64 = 5.0;
}

pub const CLEAN_SESSION_PULSES: u64 = 1_000_000;
pub const ATTACK_SESSION_PULSES: u64 = 100_000;
pub const SESSION_SEED: u64 = 2024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Absolute(f64),
    Relative(f64),
    AtMost,
    Holds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub expected: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    pub fn absolute(label: impl Into<String>, value: f64, expected: f64, tol: f64) -> Self {
        let passed = (value - expected).abs() <= tol;
        Self::make(label, value, expected, Bound::Absolute(tol), passed)
    }

    pub fn relative(label: impl Into<String>, value: f64, expected: f64, tol: f64) -> Self {
        let passed = ((value - expected) / expected).abs() <= tol;
        Self::make(label, value, expected, Bound::Relative(tol), passed)
    }

    pub fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::make(label, value, limit, Bound::AtMost, value <= limit)
    }

    pub fn holds(label: impl Into<String>, condition: bool) -> Self {
        let v = if condition { 1.0 } else { 0.0 };
        Self::make(label, v, 1.0, Bound::Holds, condition)
    }

    fn make(
        label: impl Into<String>,
        value: f64,
        expected: f64,
        bound: Bound,
        passed: bool,
    ) -> Self {
        // NaN comparisons are false, so a NaN value never passes
        Self {
            label: label.into(),
            value,
            expected,
            bound,
            passed,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bound {
            Bound::Absolute(t) => write!(
                f,
                "{} = {:.6} (want {} +/- {})",
                self.label, self.value, self.expected, t
            ),
            Bound::Relative(t) => write!(
                f,
                "{} = {:.6e} (want {:e} +/- {}%)",
                self.label,
                self.value,
                self.expected,
                t * 100.0
            ),
            Bound::AtMost => write!(
                f,
                "{} = {:.3e} (want <= {:e})",
                self.label, self.value, self.expected
            ),
            Bound::Holds => write!(
                f,
                "{}: {}",
                self.label,
                if self.passed { "holds" } else { "violated" }
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// A computation error; the criterion then fails.
    pub error: Option<String>,
}

impl CriterionResult {
    fn from_checks(id: u8, title: &'static str, checks: Result<Vec<Check>>) -> Self {
        match checks {
            Ok(checks) => Self {
                id,
                title,
                checks,
                error: None,
            },
            Err(e) => Self {
                id,
                title,
                checks: Vec::new(),
                error: Some(e.to_string()),
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        write!(
            f,
            "{} {}. {} ({}/{} checks)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            ok,
            self.checks.len()
        )?;
        if let Some(e) = &self.error {
            write!(f, ": error: {e}")?;
        }
        let failed: Vec<String> = self.failures().map(|c| c.to_string()).collect();
        if !failed.is_empty() {
            write!(f, ": {}", failed.join("; "))?;
        }
        Ok(())
    }
}

fn reference_distribution() -> Result<JointDistribution> {
    let input = SqueezedInput::new(1.0, 0.5)?;
    joint_distribution(&input, &TruncationPolicy::auto(&input)?)
}

pub fn joint_distribution_values() -> CriterionResult {
    let checks = reference_distribution().map(|jd| {
        let t = tolerances::PROBABILITY;
        vec![
            Check::absolute("P(0,0)", jd.get(0, 0), 0.417, t),
            Check::absolute("P(1,1)", jd.get(1, 1), 0.0783, t),
            Check::absolute("P(1,3)", jd.get(1, 3), 0.0216, t),
        ]
    });
    CriterionResult::from_checks(1, "joint distribution at alpha=1/2, r=1", checks)
}

pub fn heralded_statistics() -> CriterionResult {
    const TABLE: [f64; 7] = [0.145, 0.520, 0.104, 0.144, 0.0343, 0.0325, 0.00885];
    let checks = reference_distribution().and_then(|jd| {
        let h = heralded_stats(&jd)?;
        let t = tolerances::PROBABILITY;
        let mut checks = vec![Check::absolute("P1", h.p1, 0.151, t)];
        for (n, want) in TABLE.iter().enumerate() {
            checks.push(Check::absolute(format!("P({n})"), h.pn[n], *want, t));
        }
        checks.push(Check::absolute("g2(0)", h.g2, 1.17, tolerances::G2));
        Ok(checks)
    });
    CriterionResult::from_checks(2, "heralded statistics at alpha=1/2, r=1", checks)
}

pub fn threshold_probabilities() -> CriterionResult {
    let checks = reference_distribution().and_then(|jd| {
        let q = threshold_probs(&jd)?;
        let t = tolerances::PROBABILITY;
        Ok(vec![
            Check::absolute("Q1", q.q1, 0.509, t),
            Check::absolute("Q2", q.q2, 0.435, t),
            Check::absolute("Q3", q.q3, 0.129, t),
            Check::absolute("miss without attack", q.baseline_miss, 0.074, t),
            Check::absolute("miss under attack", q.attacked_miss, 0.139, t),
        ])
    });
    CriterionResult::from_checks(3, "threshold probabilities and miss shift", checks)
}

pub fn sweep_peaks() -> CriterionResult {
    let checks = sweep_maxima(0.5, 0.0, 2.0, 200, &TruncationPolicy::default()).map(|m| {
        let (t, tl) = (tolerances::PROBABILITY, tolerances::PEAK_LOCATION);
        vec![
            Check::absolute("max P(1,1)", m.p11.value, 0.0799, t),
            Check::absolute("argmax P(1,1)", m.p11.r, 0.85, tl),
            Check::absolute("max P1", m.p1.value, 0.165, t),
            Check::absolute("argmax P1", m.p1.r, 0.675, tl),
        ]
    });
    CriterionResult::from_checks(4, "sweep maxima at alpha=1/2", checks)
}

pub fn band_structure_values() -> CriterionResult {
    let spec = CrystalSpec::lithium_niobate_stack();
    let checks = (|| -> Result<Vec<Check>> {
        let edges = band_frequencies_tilde(&spec, 0.0, 8, crate::bands::DEFAULT_SCAN_RESOLUTION)?;
        let w_s = edges[3];
        let omega_s = spec.omega_from_tilde(w_s);
        let lambda_s = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega_s;
        let bands = band_structure(&spec, 8, 64)?;
        let tol = tolerances::BAND_EDGE;
        Ok(vec![
            Check::absolute("band-4 edge", w_s, 1.18, tol),
            Check::absolute("band-8 edge", edges[7], 2.36, tol),
            Check::holds(
                "2 w_s lies in band 8",
                band_containing(&bands, 2.0 * w_s) == Some(8),
            ),
            Check::absolute("2 w_s", 2.0 * w_s, 2.36, tol),
            Check::relative("lambda_s", lambda_s, 9.27e-7, tolerances::PHYSICAL),
            Check::relative("lambda_p", lambda_s / 2.0, 4.64e-7, tolerances::PHYSICAL),
        ])
    })();
    CriterionResult::from_checks(5, "band structure of the reference crystal", checks)
}

pub fn tuning_values() -> CriterionResult {
    let spec = CrystalSpec::lithium_niobate_stack();
    let checks = tune_to_group_velocity(&spec, 4, 4.59e-3 * SPEED_OF_LIGHT).map(|t| {
        let tol = tolerances::TUNING;
        vec![
            Check::relative("period * k", t.k_star_tilde, 4.33e-3, tol),
            Check::relative("delta nu", t.delta_nu, 3.13e8, tol),
            Check::relative("delta nu / nu_s", t.delta_nu_over_nu_s, 9.69e-7, tol),
            Check::relative("nu_s", t.nu_s, 3.23e14, tol),
        ]
    });
    CriterionResult::from_checks(6, "group-velocity tuning on band 4", checks)
}

pub fn source_model_values() -> CriterionResult {
    let spec = CrystalSpec::lithium_niobate_stack();
    let checks = (|| -> Result<Vec<Check>> {
        let w_s = band_frequencies_tilde(&spec, 0.0, 4, crate::bands::DEFAULT_SCAN_RESOLUTION)?[3];
        let omega_s = spec.omega_from_tilde(w_s);
        let pump = PumpSpec::reference_pump();
        let squeeze = squeeze_report(&spec, &pump, omega_s, 4.59e-3)?;
        let weak = PumpSpec::new(2.0e-7, 5.0e-6, 1.0, None)?;
        let a_weak = flux_to_amplitude(&weak)?;
        let n = photon_number(
            a_weak,
            omega_from_wavelength(1.535e-6),
            pulse_volume(3.7e-9, 5.0e-6, BeamGeometry::Square),
        )?;
        let tol = tolerances::PHYSICAL;
        Ok(vec![
            Check::relative("A(zeta=1) / (v_g/c)", squeeze.unit_zeta_slope, 1.17e8, tol),
            Check::relative("pump amplitude", flux_to_amplitude(&pump)?, 5.36e5, tol),
            Check::relative("weak-pulse amplitude", a_weak, 1.39e3, tol),
            Check::relative("photon number", n, 7.28e3, tol),
        ])
    })();
    CriterionResult::from_checks(7, "source model conversions", checks)
}

pub fn oracle_equivalence() -> CriterionResult {
    let checks = (|| -> Result<Vec<Check>> {
        let rs = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5];
        let alphas = [0.0, 0.25, 0.5, 0.75, 1.0];
        let (mut diff, mut norm, mut swap, mut parity) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        for &r in &rs {
            for &alpha in &alphas {
                let input = SqueezedInput::new(r, alpha)?;
                let trunc = TruncationPolicy::auto(&input)?;
                let closed = output_amplitudes(&input, &trunc)?;
                let oracle = oracle_state(&input, &trunc)?;
                let n = closed.n_max();
                diff = diff.max(closed.max_abs_diff(&oracle, n));
                norm = norm.max((1.0 - closed.captured_mass()).abs());
                for n1 in 0..=n {
                    for n2 in 0..=n {
                        let p = closed.get(n1, n2).powi(2);
                        swap = swap.max((p - closed.get(n2, n1).powi(2)).abs());
                        if alpha == 0.0 && (n1 + n2) % 2 == 1 {
                            parity = parity.max(closed.get(n1, n2).abs());
                        }
                    }
                }
            }
        }
        Ok(vec![
            Check::at_most("max amplitude difference", diff, tolerances::ORACLE),
            Check::at_most("max normalization error", norm, tolerances::NORMALIZATION),
            Check::at_most("max mode-swap asymmetry", swap, tolerances::MODE_SWAP),
            Check::at_most("max odd-total amplitude at alpha=0", parity, 0.0),
        ])
    })();
    CriterionResult::from_checks(8, "closed form against the oracle", checks)
}

pub fn monte_carlo_consistency() -> CriterionResult {
    let checks = reference_distribution().and_then(|jd| {
        let z = tolerances::Z_THRESHOLD;
        let clean = simulate_session_with_threshold(
            &jd,
            CLEAN_SESSION_PULSES,
            &AttackModel::none(),
            SESSION_SEED,
            z,
        )?;
        let q = threshold_probs(&jd)?;
        let expected = (q.q1 - q.q2) / q.q1;
        let sigma = (expected * (1.0 - expected) / clean.herald_count as f64).sqrt();
        let attacked = simulate_session_with_threshold(
            &jd,
            ATTACK_SESSION_PULSES,
            &AttackModel::beam_splitter(0.5)?,
            SESSION_SEED,
            z,
        )?;
        Ok(vec![
            Check::at_most(
                "clean miss deviation in sigmas",
                (clean.bob_miss_given_herald - expected).abs() / sigma,
                tolerances::MONTE_CARLO_SIGMAS,
            ),
            Check::holds("closed-form baseline equals (q1-q2)/q1", {
                let b = expected_miss_given_herald(&jd, &AttackModel::none())?;
                (b - expected).abs() < 1e-12
            }),
            Check::holds(
                "clean session judged clean",
                clean.verdict == Verdict::Clean,
            ),
            Check::holds(
                "50-50 attack flagged",
                attacked.verdict == Verdict::AttackSuspected,
            ),
        ])
    });
    CriterionResult::from_checks(9, "Monte Carlo BB84 sessions", checks)
}

pub fn run_all() -> Vec<CriterionResult> {
    vec![
        joint_distribution_values(),
        heralded_statistics(),
        threshold_probabilities(),
        sweep_peaks(),
        band_structure_values(),
        tuning_values(),
        source_model_values(),
        oracle_equivalence(),
        monte_carlo_consistency(),
    ]
}

pub fn format_table(results: &[CriterionResult]) -> String {
    let mut out = String::new();
    for r in results {
        let _ = writeln!(out, "{r}");
    }
    let passed = results.iter().filter(|r| r.passed()).count();
    let _ = writeln!(out, "{passed}/{} criteria passed", results.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_bounds() {
        assert!(Check::absolute("x", 1.001, 1.0, 0.002).passed);
        assert!(!Check::absolute("x", 1.003, 1.0, 0.002).passed);
        assert!(Check::relative("x", 101.0, 100.0, 0.01).passed);
        assert!(!Check::relative("x", f64::NAN, 100.0, 0.01).passed);
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
        assert!(Check::at_most("x", 0.0, 0.0).passed);
    }

    #[test]
    fn errors_fail_the_criterion() {
        let r = CriterionResult::from_checks(1, "t", Err(crate::Error::EmptySession));
        assert!(!r.passed());
        assert!(r.to_string().starts_with("FAIL 1. t"));
    }

    #[test]
    fn one_line_per_criterion() {
        let r = joint_distribution_values();
        assert!(r.passed(), "{r}");
        let table = format_table(&[r.clone(), r]);
        assert_eq!(table.lines().count(), 3);
        assert!(table.starts_with("PASS 1."));
    }
}
