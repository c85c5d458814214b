//! Truncated Fock-space amplitudes of the beam-splitter output state.
//!
//! A squeezed coherent state `S(-r) D(alpha) |0>` enters port `a` of a 50-50
//! beam splitter with vacuum on port `b`. The output factorises as
//! `S_ab(-r/2) S_a(-r/2) S_b(-r/2) D_a(alpha/sqrt2) D_b(alpha/sqrt2) |0,0>`,
//! and [`output_amplitudes`] evaluates `<n1,n2|...>` from closed-form matrix
//! elements. [`oracle_state`] recomputes the same state by exponentiating
//! truncated operators along the physical pipeline and serves as the
//! independent check.
//!
//! All phases are zero and `alpha` is real, so every amplitude is real.

mod closed_form;
mod oracle;

pub use closed_form::{
    coherent_amplitudes, output_amplitudes, output_row, squeeze_matrix, two_mode_squeeze_element,
    SqueezeKernel,
};
pub use oracle::{expm_action, oracle_state, BandedGenerator};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::LogFactorials;

/// Abstract quantum input to the beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedInput {
    r: f64,
    alpha: f64,
}

impl SqueezedInput {
    /// Squeeze magnitude `r >= 0` and real coherent amplitude `alpha`.
    pub fn new(r: f64, alpha: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(invalid(format!(
                "squeeze magnitude r must be finite and >= 0, got {r}"
            )));
        }
        if !alpha.is_finite() {
            return Err(invalid(format!(
                "coherent amplitude must be finite, got {alpha}"
            )));
        }
        Ok(Self { r, alpha })
    }

    /// Accepts pump, squeeze and beam-splitter phases only when all are zero.
    pub fn with_phases(r: f64, alpha: f64, theta: f64, phi: f64, delta: f64) -> Result<Self> {
        if theta != 0.0 || phi != 0.0 || delta != 0.0 {
            return Err(invalid(
                "only zero phases (theta = phi = delta = 0) are supported",
            ));
        }
        Self::new(r, alpha)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta_phase(&self) -> f64 {
        0.0
    }

    pub fn phi_phase(&self) -> f64 {
        0.0
    }

    pub fn delta_phase(&self) -> f64 {
        0.0
    }
}

/// Photon-number cutoff for each output mode plus the allowed missing mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    n_max: usize,
    tail_tolerance: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            n_max: 40,
            tail_tolerance: 1e-8,
        }
    }
}

impl TruncationPolicy {
    pub fn new(n_max: usize, tail_tolerance: f64) -> Result<Self> {
        if n_max < 1 {
            return Err(invalid("n_max must be at least 1"));
        }
        if !(tail_tolerance > 0.0 && tail_tolerance < 1.0) {
            return Err(invalid(format!(
                "tail_tolerance must lie in (0, 1), got {tail_tolerance}"
            )));
        }
        Ok(Self {
            n_max,
            tail_tolerance,
        })
    }

    /// Smallest cutoff whose predicted missing mass is within a quarter of
    /// `tail_tolerance`, never below `floor`.
    ///
    /// The prediction is exact up to the precision of the total photon-number
    /// distribution: the beam splitter sends each of the `T` input photons to
    /// either port with probability 1/2, so the box `n1, n2 <= n_max` holds
    /// the binomial mass `P(T - n_max <= Bin(T, 1/2) <= n_max)` of each `T`.
    pub fn suggested(input: &SqueezedInput, tail_tolerance: f64, floor: usize) -> Result<Self> {
        let dist = TotalPhotonDistribution::new(input);
        let mut n_max = floor.max(1);
        while dist.box_deficit(n_max) > 0.25 * tail_tolerance {
            n_max += 1;
            if n_max > MAX_SUGGESTED_N {
                return Err(invalid(format!(
                    "no cutoff up to {MAX_SUGGESTED_N} reaches tail tolerance {tail_tolerance:e}"
                )));
            }
        }
        Self::new(n_max, tail_tolerance)
    }

    /// [`TruncationPolicy::suggested`] with the default tolerance and the
    /// default cutoff as a floor.
    pub fn auto(input: &SqueezedInput) -> Result<Self> {
        let d = Self::default();
        Self::suggested(input, d.tail_tolerance, d.n_max)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    /// Fail with [`Error::Truncation`] when `captured` falls short of one by
    /// more than the tolerance.
    pub fn check(&self, captured: f64) -> Result<()> {
        let deficit = 1.0 - captured;
        if captured > 1.0 + NORM_EXCESS_TOLERANCE {
            return Err(Error::Unnormalized { excess: -deficit });
        }
        if deficit > self.tail_tolerance || !captured.is_finite() {
            return Err(Error::Truncation {
                captured,
                deficit,
                tolerance: self.tail_tolerance,
                n_max: self.n_max,
            });
        }
        Ok(())
    }
}

/// Largest excess of captured mass over one attributed to rounding.
pub const NORM_EXCESS_TOLERANCE: f64 = 1e-12;

const MAX_SUGGESTED_N: usize = 400;

/// Joint amplitudes `<n1, n2|psi_out>` for `0 <= n1, n2 <= n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeMatrix {
    n_max: usize,
    entries: Vec<f64>,
}

impl AmplitudeMatrix {
    pub(crate) fn from_entries(n_max: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), (n_max + 1) * (n_max + 1));
        Self { n_max, entries }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn get(&self, n1: usize, n2: usize) -> f64 {
        self.entries[n1 * (self.n_max + 1) + n2]
    }

    /// Row-major entries, `(n_max + 1)^2` of them.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn captured_mass(&self) -> f64 {
        self.entries.iter().map(|a| a * a).sum()
    }

    /// Largest absolute entrywise difference over `n1, n2 <= block`.
    pub fn max_abs_diff(&self, other: &AmplitudeMatrix, block: usize) -> f64 {
        let block = block.min(self.n_max).min(other.n_max);
        let mut worst = 0.0_f64;
        for n1 in 0..=block {
            for n2 in 0..=block {
                worst = worst.max((self.get(n1, n2) - other.get(n1, n2)).abs());
            }
        }
        worst
    }
}

/// Photon-number distribution of the single-mode state `S(-r) D(alpha)|0>`
/// that enters the beam splitter. The splitter conserves the total number, so
/// this is also the distribution of `n1 + n2` at the output.
#[derive(Debug, Clone)]
pub struct TotalPhotonDistribution {
    probs: Vec<f64>,
    beyond: f64,
    lf: LogFactorials,
}

impl TotalPhotonDistribution {
    const T_CAP: usize = 4000;

    pub fn new(input: &SqueezedInput) -> Self {
        let r = input.r();
        let kernel = SqueezeKernel::new(r, Self::T_CAP + 64);
        let coh = coherent_amplitudes(input.alpha(), Self::T_CAP);
        let m_eff = significant_len(&coh, 1e-18);
        let mut probs = Vec::new();
        let mut total = 0.0;
        for t in 0..=Self::T_CAP {
            let mut amp = 0.0;
            for (m, d) in coh.iter().enumerate().take(m_eff) {
                if (t + m) % 2 == 0 {
                    amp += kernel.single(t, m) * d;
                }
            }
            let p = amp * amp;
            probs.push(p);
            total += p;
            let last_two = p + probs.get(t.wrapping_sub(1)).copied().unwrap_or(1.0);
            if t >= 20 && last_two < 1e-30 {
                break;
            }
        }
        let lf = LogFactorials::new(probs.len() + 2);
        Self {
            probs,
            beyond: (1.0 - total).max(0.0),
            lf,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn binom_pmf_half(&self, t: usize, n: usize) -> f64 {
        (self.lf.ln_binomial(t, n) - t as f64 * std::f64::consts::LN_2).exp()
    }

    /// Predicted mass outside the box `n1, n2 <= n_max`.
    pub fn box_deficit(&self, n_max: usize) -> f64 {
        let mut deficit = 0.0;
        for (t, &p) in self.probs.iter().enumerate() {
            if t <= n_max || p == 0.0 {
                continue;
            }
            if t > 2 * n_max {
                deficit += p;
                continue;
            }
            let lower: f64 = (0..t - n_max).map(|n| self.binom_pmf_half(t, n)).sum();
            deficit += p * 2.0 * lower;
        }
        deficit + self.beyond
    }

    /// Predicted mass of `P(n1, n2)` with `n1` fixed and `n2 > n_max`.
    pub fn row_deficit(&self, n1: usize, n_max: usize) -> f64 {
        let mut deficit = 0.0;
        for (t, &p) in self.probs.iter().enumerate() {
            if t > n1 + n_max && p > 0.0 {
                deficit += p * self.binom_pmf_half(t, n1);
            }
        }
        deficit + self.beyond
    }
}

/// Length of the prefix of `v` outside of which every entry is below
/// `rel * max|v|`.
pub(crate) fn significant_len(v: &[f64], rel: f64) -> usize {
    let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return 1.min(v.len());
    }
    v.iter()
        .rposition(|x| x.abs() > rel * peak)
        .map_or(1, |i| i + 1)
}
