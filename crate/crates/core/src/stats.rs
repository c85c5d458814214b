//! Photon-counting statistics of the beam-splitter output: the joint
//! distribution `P(n1, n2)`, heralded statistics of mode 2 given exactly one
//! photon in mode 1, threshold-detector probabilities and squeeze sweeps.
//!
//! Mode 1 is Alice's herald port, mode 2 is the photon sent to Bob.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fock::{
    output_amplitudes, output_row, SqueezedInput, TotalPhotonDistribution, TruncationPolicy,
    NORM_EXCESS_TOLERANCE,
};
use crate::numeric::refine_max;

/// Truncated joint photon-number distribution `P(n1, n2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    n_max: usize,
    p: Vec<f64>,
    captured_mass: f64,
    input_echo: SqueezedInput,
    tail_tolerance: f64,
}

impl JointDistribution {
    /// Wraps a row-major `(n_max + 1)^2` probability table.
    pub fn from_probabilities(
        n_max: usize,
        p: Vec<f64>,
        input_echo: SqueezedInput,
        tail_tolerance: f64,
    ) -> Result<Self> {
        if p.len() != (n_max + 1) * (n_max + 1) {
            return Err(invalid(format!(
                "expected {} probabilities for n_max = {n_max}, got {}",
                (n_max + 1) * (n_max + 1),
                p.len()
            )));
        }
        if let Some(bad) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(invalid(format!(
                "probabilities must be finite and >= 0, got {bad}"
            )));
        }
        let captured_mass: f64 = p.iter().sum();
        if captured_mass > 1.0 + NORM_EXCESS_TOLERANCE {
            return Err(Error::Unnormalized {
                excess: captured_mass - 1.0,
            });
        }
        Ok(Self {
            n_max,
            p,
            captured_mass,
            input_echo,
            tail_tolerance,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn get(&self, n1: usize, n2: usize) -> f64 {
        self.p[n1 * (self.n_max + 1) + n2]
    }

    /// Row-major probabilities.
    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// `P(n1, .)` for fixed `n1`.
    pub fn row(&self, n1: usize) -> &[f64] {
        let side = self.n_max + 1;
        &self.p[n1 * side..(n1 + 1) * side]
    }

    pub fn captured_mass(&self) -> f64 {
        self.captured_mass
    }

    pub fn input_echo(&self) -> &SqueezedInput {
        &self.input_echo
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    /// The distribution with the two modes exchanged.
    pub fn transposed(&self) -> Self {
        let side = self.n_max + 1;
        let mut p = vec![0.0; side * side];
        for n1 in 0..side {
            for n2 in 0..side {
                p[n2 * side + n1] = self.get(n1, n2);
            }
        }
        Self { p, ..self.clone() }
    }

    fn require_captured(&self) -> Result<()> {
        let deficit = 1.0 - self.captured_mass;
        if deficit > self.tail_tolerance {
            return Err(Error::Truncation {
                captured: self.captured_mass,
                deficit,
                tolerance: self.tail_tolerance,
                n_max: self.n_max,
            });
        }
        Ok(())
    }
}

/// `P(n1, n2) = |<n1, n2|psi_out>|^2` from the closed-form amplitudes.
pub fn joint_distribution(
    input: &SqueezedInput,
    trunc: &TruncationPolicy,
) -> Result<JointDistribution> {
    let amps = output_amplitudes(input, trunc)?;
    let p = amps.entries().iter().map(|a| a * a).collect();
    JointDistribution::from_probabilities(amps.n_max(), p, *input, trunc.tail_tolerance())
}

/// Statistics of mode 2 conditioned on exactly one photon in mode 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeraldedStats {
    /// `P_1 = sum_n P(1, n)`.
    pub p1: f64,
    /// `P(n) = P(1, n) / P_1`.
    pub pn: Vec<f64>,
    /// `<n(n-1)> / <n>^2` of `pn`; zero when the heralded mode is empty.
    pub g2: f64,
}

pub fn heralded_stats(jd: &JointDistribution) -> Result<HeraldedStats> {
    jd.require_captured()?;
    heralded_from_row(jd.row(1))
}

fn heralded_from_row(row: &[f64]) -> Result<HeraldedStats> {
    let p1: f64 = row.iter().sum();
    if p1 <= 0.0 {
        return Err(Error::NoHeraldEvents);
    }
    let pn: Vec<f64> = row.iter().map(|p| p / p1).collect();
    let (mut mean, mut factorial2) = (0.0, 0.0);
    for (n, p) in pn.iter().enumerate() {
        let n = n as f64;
        mean += n * p;
        factorial2 += n * (n - 1.0) * p;
    }
    let g2 = if mean > 0.0 {
        factorial2 / (mean * mean)
    } else {
        0.0
    };
    Ok(HeraldedStats { p1, pn, g2 })
}

/// Threshold-detector probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdProbs {
    /// Alice's detector fires: `sum_{n1 >= 1, n2 >= 0} P`.
    pub q1: f64,
    /// Both detectors fire: `sum_{n1 >= 1, n2 >= 1} P`.
    pub q2: f64,
    /// Alice fires and exactly one photon goes to Bob: `sum_{n1 >= 1} P(n1, 1)`.
    pub q3: f64,
    /// Joint mass of "Alice fires, Bob does not": `q1 - q2`.
    pub baseline_miss: f64,
    /// The same under a balanced beam-splitting attack: `q1 - q2 + q3 / 2`.
    pub attacked_miss: f64,
}

pub fn threshold_probs(jd: &JointDistribution) -> Result<ThresholdProbs> {
    jd.require_captured()?;
    let (mut q1, mut q2, mut q3) = (0.0, 0.0, 0.0);
    for n1 in 1..=jd.n_max() {
        let row = jd.row(n1);
        let total: f64 = row.iter().sum();
        q1 += total;
        q2 += total - row[0];
        q3 += row.get(1).copied().unwrap_or(0.0);
    }
    let baseline_miss = q1 - q2;
    Ok(ThresholdProbs {
        q1,
        q2,
        q3,
        baseline_miss,
        attacked_miss: baseline_miss + 0.5 * q3,
    })
}

/// Heralding quantities at one squeeze magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepValues {
    /// `P(1, 1)`.
    pub p11: f64,
    /// `P_1`.
    pub p1: f64,
    /// `P(1) = P(1, 1) / P_1`.
    pub p_single: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r: f64,
    /// Per-point failures (truncation, invalid `r`) are kept in the row.
    pub values: Result<SweepValues>,
}

/// Heralding quantities at one point, from the `n1 = 1` row only.
///
/// The row cutoff is raised from `trunc.n_max()` until the predicted mass of
/// `P(1, n2 > cutoff)` is within the tail tolerance.
pub fn sweep_point(alpha: f64, r: f64, trunc: &TruncationPolicy) -> Result<SweepValues> {
    let input = SqueezedInput::new(r, alpha)?;
    let dist = TotalPhotonDistribution::new(&input);
    let mut n = trunc.n_max();
    while dist.row_deficit(1, n) > trunc.tail_tolerance() {
        n += 1;
        if n > MAX_ROW_CUTOFF {
            return Err(Error::Truncation {
                captured: 1.0 - dist.row_deficit(1, n - 1),
                deficit: dist.row_deficit(1, n - 1),
                tolerance: trunc.tail_tolerance(),
                n_max: n - 1,
            });
        }
    }
    let row: Vec<f64> = output_row(&input, 1, n).iter().map(|a| a * a).collect();
    let stats = heralded_from_row(&row)?;
    Ok(SweepValues {
        p11: row[1],
        p1: stats.p1,
        p_single: stats.pn[1],
    })
}

const MAX_ROW_CUTOFF: usize = 400;

/// One row per grid value, evaluated in parallel.
pub fn sweep_r(alpha: f64, r_grid: &[f64], trunc: &TruncationPolicy) -> Vec<SweepRow> {
    r_grid
        .par_iter()
        .map(|&r| SweepRow {
            r,
            values: sweep_point(alpha, r, trunc),
        })
        .collect()
}

/// Location and height of a sweep maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub r: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepMaxima {
    pub p11: Peak,
    pub p1: Peak,
}

/// Maxima of `P(1, 1)` and `P_1` over `[r_lo, r_hi]`: coarse scan on
/// `steps + 1` points, then golden-section refinement to `1e-6` in `r`.
pub fn sweep_maxima(
    alpha: f64,
    r_lo: f64,
    r_hi: f64,
    steps: usize,
    trunc: &TruncationPolicy,
) -> Result<SweepMaxima> {
    let grid = linspace(r_lo, r_hi, steps);
    let locate = |pick: fn(&SweepValues) -> f64| -> Result<Peak> {
        let mut failure = None;
        let (r, value) = refine_max(
            |r| match sweep_point(alpha, r, trunc) {
                Ok(v) => pick(&v),
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NEG_INFINITY
                }
            },
            &grid,
            1e-6,
        );
        match failure {
            Some(e) => Err(e),
            None => Ok(Peak { r, value }),
        }
    };
    Ok(SweepMaxima {
        p11: locate(|v| v.p11)?,
        p1: locate(|v| v.p1)?,
    })
}

/// `steps + 1` evenly spaced points from `lo` to `hi`; a single point when
/// `steps == 0` or `lo == hi`.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 0 || lo == hi {
        return vec![lo];
    }
    (0..=steps)
        .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_point() -> JointDistribution {
        let input = SqueezedInput::new(1.0, 0.5).unwrap();
        joint_distribution(&input, &TruncationPolicy::auto(&input).unwrap()).unwrap()
    }

    #[test]
    fn joint_values() {
        let jd = reference_point();
        assert!((jd.get(0, 0) - 0.417).abs() < 0.002);
        assert!((jd.get(1, 1) - 0.0783).abs() < 0.002);
        assert!((jd.get(1, 3) - 0.0216).abs() < 0.002);
    }

    #[test]
    fn heralded_values_and_odd_enhancement() {
        let h = heralded_stats(&reference_point()).unwrap();
        assert!((h.p1 - 0.151).abs() < 0.002);
        let table = [0.145, 0.520, 0.104, 0.144, 0.0343, 0.0325, 0.00885];
        for (n, want) in table.iter().enumerate() {
            assert!((h.pn[n] - want).abs() < 0.002, "n={n} {}", h.pn[n]);
        }
        // odd photon numbers are enhanced: 3 beats 2, and each odd n beats n + 1
        assert!(h.pn[3] > h.pn[2]);
        for n in [1, 3, 5] {
            assert!(h.pn[n] > h.pn[n + 1]);
        }
        // but 5 does not beat 4
        assert!(h.pn[5] < h.pn[4]);
        assert!((h.g2 - 1.17).abs() < 0.02);
        assert!(h.pn[1] > (-1f64).exp());
        assert!((h.pn.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn threshold_values() {
        let jd = reference_point();
        let q = threshold_probs(&jd).unwrap();
        assert!((q.q1 - 0.509).abs() < 0.002);
        assert!((q.q2 - 0.435).abs() < 0.002);
        assert!((q.q3 - 0.129).abs() < 0.002);
        assert!((q.baseline_miss - 0.074).abs() < 0.002);
        assert!((q.attacked_miss - 0.139).abs() < 0.002);
        assert!((q.attacked_miss - q.baseline_miss - 0.5 * q.q3).abs() < 1e-15);
        assert!(0.0 <= q.q3 && q.q3 <= q.q2 && q.q2 <= q.q1 && q.q1 <= 1.0);
        // marginal consistency
        let marginal: f64 = (1..=jd.n_max())
            .map(|n1| jd.row(n1).iter().sum::<f64>())
            .sum();
        assert!((marginal - q.q1).abs() < 1e-10);
    }

    #[test]
    fn vacuum_has_no_heralds() {
        let input = SqueezedInput::new(0.0, 0.0).unwrap();
        let jd = joint_distribution(&input, &TruncationPolicy::default()).unwrap();
        assert_eq!(jd.get(0, 0), 1.0);
        assert_eq!(heralded_stats(&jd), Err(Error::NoHeraldEvents));
        let q = threshold_probs(&jd).unwrap();
        assert_eq!((q.q1, q.q2, q.q3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn statistics_survive_transposition() {
        let jd = reference_point();
        let t = jd.transposed();
        let (a, b) = (heralded_stats(&jd).unwrap(), heralded_stats(&t).unwrap());
        assert!((a.p1 - b.p1).abs() < 1e-12 && (a.g2 - b.g2).abs() < 1e-10);
        let (qa, qb) = (threshold_probs(&jd).unwrap(), threshold_probs(&t).unwrap());
        assert!((qa.q1 - qb.q1).abs() < 1e-12 && (qa.q3 - qb.q3).abs() < 1e-12);
    }

    #[test]
    fn sweep_row_agrees_with_full_matrix() {
        let trunc = TruncationPolicy::default();
        let v = sweep_point(0.5, 1.0, &trunc).unwrap();
        let h = heralded_stats(&reference_point()).unwrap();
        assert!((v.p1 - h.p1).abs() < 1e-9);
        assert!((v.p_single - h.pn[1]).abs() < 1e-8);
    }

    #[test]
    fn sweep_keeps_bad_rows() {
        let rows = sweep_r(0.5, &[0.5, -1.0], &TruncationPolicy::default());
        assert!(rows[0].values.is_ok());
        assert_eq!(rows[1].values.as_ref().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn from_probabilities_validates() {
        let input = SqueezedInput::new(0.0, 0.0).unwrap();
        assert!(JointDistribution::from_probabilities(1, vec![0.5; 3], input, 1e-8).is_err());
        assert!(JointDistribution::from_probabilities(1, vec![0.5; 4], input, 1e-8).is_err());
        assert!(
            JointDistribution::from_probabilities(1, vec![-0.1, 0.5, 0.3, 0.3], input, 1e-8)
                .is_err()
        );
    }

    #[test]
    fn linspace_edges() {
        assert_eq!(linspace(1.0, 1.0, 10), vec![1.0]);
        assert_eq!(linspace(0.0, 1.0, 2), vec![0.0, 0.5, 1.0]);
    }
}
