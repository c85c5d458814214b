//! Monte Carlo of a heralded-source BB84 session with an optional
//! beam-splitting eavesdropper, and a detector for the attack based on the
//! rate at which Bob misses heralded pulses.
//!
//! Per pulse, `(n1, n2)` is drawn from the joint distribution. Alice's
//! threshold detector heralds when `n1 >= 1`. Eve, when present, diverts each
//! of Bob's `n2` photons independently with probability `splitting_ratio`;
//! Bob's threshold detector fires when at least one photon reaches him.
//! Mass outside the truncated box goes to an overflow cell that is treated
//! as multi-photon in both modes.
//!
//! Randomness comes from ChaCha20 seeded with the session seed, one stream
//! per chunk of [`CHUNK_PULSES`] pulses, so a session is reproducible for a
//! given seed regardless of thread count. Every pulse consumes the same
//! draws whatever the attack, which makes sessions with different splitting
//! ratios but equal seeds directly comparable.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::stats::{threshold_probs, JointDistribution};

pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha), stream = chunk index";
pub const CHUNK_PULSES: u64 = 1 << 16;
pub const DEFAULT_Z_THRESHOLD: f64 = 5.0;
/// Fewer heralds than this make the attack test inconclusive.
pub const MIN_HERALDS_FOR_TEST: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    None,
    BalancedBeamSplitter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackModel {
    pub kind: AttackKind,
    /// Probability that Eve diverts any one photon.
    #[serde(default = "half")]
    pub splitting_ratio: f64,
}

fn half() -> f64 {
    0.5
}

impl AttackModel {
    pub fn none() -> Self {
        Self {
            kind: AttackKind::None,
            splitting_ratio: 0.5,
        }
    }

    pub fn beam_splitter(splitting_ratio: f64) -> Result<Self> {
        let model = Self {
            kind: AttackKind::BalancedBeamSplitter,
            splitting_ratio,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.splitting_ratio) {
            return Err(invalid(format!(
                "splitting ratio must lie in [0, 1], got {}",
                self.splitting_ratio
            )));
        }
        Ok(())
    }

    /// Per-photon diversion probability actually applied.
    pub fn effective_ratio(&self) -> f64 {
        match self.kind {
            AttackKind::None => 0.0,
            AttackKind::BalancedBeamSplitter => self.splitting_ratio,
        }
    }
}

impl Default for AttackModel {
    fn default() -> Self {
        Self::none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Clean,
    AttackSuspected,
    Inconclusive,
}

/// Raw counts of a session. Merging is plain addition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionTally {
    pub n_pulses: u64,
    pub herald_count: u64,
    /// Heralded pulses on which Bob's detector fired.
    pub bob_detect_count: u64,
    /// Heralded, detected, and Alice's and Bob's bases agree.
    pub sifted_count: u64,
    /// Pulses drawn from the overflow cell.
    pub overflow_count: u64,
    /// Heralded misses split by Bob's photon number before the attack; the
    /// last entry collects the overflow cell.
    pub miss_by_n2: Vec<u64>,
    /// Empirical counts of `(n1, n2)`, row-major over the box, followed by
    /// the overflow cell.
    pub joint_counts: Vec<u64>,
}

impl SessionTally {
    fn empty(side: usize) -> Self {
        Self {
            n_pulses: 0,
            herald_count: 0,
            bob_detect_count: 0,
            sifted_count: 0,
            overflow_count: 0,
            miss_by_n2: vec![0; side + 1],
            joint_counts: vec![0; side * side + 1],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.n_pulses += other.n_pulses;
        self.herald_count += other.herald_count;
        self.bob_detect_count += other.bob_detect_count;
        self.sifted_count += other.sifted_count;
        self.overflow_count += other.overflow_count;
        for (a, b) in self.miss_by_n2.iter_mut().zip(&other.miss_by_n2) {
            *a += b;
        }
        for (a, b) in self.joint_counts.iter_mut().zip(&other.joint_counts) {
            *a += b;
        }
        self
    }

    pub fn bob_miss_count(&self) -> u64 {
        self.herald_count - self.bob_detect_count
    }
}

/// Session summary; serializes to JSON with snake_case keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub n_pulses: u64,
    pub herald_count: u64,
    pub bob_detect_count: u64,
    /// Misses per herald.
    pub bob_miss_given_herald: f64,
    /// Heralded misses per pulse, comparable to `q1 - q2`.
    pub bob_miss_joint: f64,
    pub sifted_count: u64,
    pub overflow_count: u64,
    pub miss_by_n2: Vec<u64>,
    /// Closed-form miss-given-herald rate of an unattacked source.
    pub baseline_miss_given_herald: f64,
    pub z_score: Option<f64>,
    pub z_threshold: f64,
    pub verdict: Verdict,
    pub attack: AttackModel,
    pub seed: u64,
    pub rng_algorithm: String,
}

/// Draws the counts of a session.
pub fn simulate_tally(
    jd: &JointDistribution,
    n_pulses: u64,
    attack: &AttackModel,
    seed: u64,
) -> Result<SessionTally> {
    if n_pulses == 0 {
        return Err(Error::EmptySession);
    }
    attack.validate()?;
    let side = jd.n_max() + 1;
    let overflow = (1.0 - jd.captured_mass()).max(0.0);
    let mut weights = jd.probabilities().to_vec();
    weights.push(overflow);
    let cells = WeightedIndex::new(&weights)
        .map_err(|e| invalid(format!("joint distribution cannot be sampled: {e}")))?;
    let ratio = attack.effective_ratio();
    let n_chunks = n_pulses.div_ceil(CHUNK_PULSES);
    let tally = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = CHUNK_PULSES.min(n_pulses - chunk * CHUNK_PULSES);
            run_chunk(&mut rng, &cells, side, ratio, count)
        })
        .reduce(|| SessionTally::empty(side), SessionTally::merge);
    Ok(tally)
}

fn run_chunk(
    rng: &mut ChaCha20Rng,
    cells: &WeightedIndex<f64>,
    side: usize,
    ratio: f64,
    count: u64,
) -> SessionTally {
    let mut t = SessionTally::empty(side);
    t.n_pulses = count;
    let overflow_cell = side * side;
    for _ in 0..count {
        let cell = cells.sample(rng);
        t.joint_counts[cell] += 1;
        let (n1, n2) = if cell == overflow_cell {
            t.overflow_count += 1;
            (side, side)
        } else {
            (cell / side, cell % side)
        };
        // one uniform per photon sent to Bob, drawn whether or not Eve acts
        let mut survives = false;
        for _ in 0..n2 {
            let u: f64 = rng.random();
            survives |= u >= ratio;
        }
        let bases: u32 = rng.random();
        if n1 == 0 {
            continue;
        }
        t.herald_count += 1;
        if survives {
            t.bob_detect_count += 1;
            // bit 0: Alice's basis, bit 1: Bob's basis
            if bases & 1 == (bases >> 1) & 1 {
                t.sifted_count += 1;
            }
        } else {
            t.miss_by_n2[n2.min(side)] += 1;
        }
    }
    t
}

/// Runs a session and judges it against the closed-form clean baseline of
/// `jd` at the default z threshold.
pub fn simulate_session(
    jd: &JointDistribution,
    n_pulses: u64,
    attack: &AttackModel,
    seed: u64,
) -> Result<SessionReport> {
    simulate_session_with_threshold(jd, n_pulses, attack, seed, DEFAULT_Z_THRESHOLD)
}

pub fn simulate_session_with_threshold(
    jd: &JointDistribution,
    n_pulses: u64,
    attack: &AttackModel,
    seed: u64,
    z_threshold: f64,
) -> Result<SessionReport> {
    let baseline = expected_miss_given_herald(jd, &AttackModel::none())?;
    let tally = simulate_tally(jd, n_pulses, attack, seed)?;
    let herald = tally.herald_count;
    let misses = tally.bob_miss_count();
    let mut report = SessionReport {
        n_pulses: tally.n_pulses,
        herald_count: herald,
        bob_detect_count: tally.bob_detect_count,
        bob_miss_given_herald: if herald > 0 {
            misses as f64 / herald as f64
        } else {
            0.0
        },
        bob_miss_joint: misses as f64 / tally.n_pulses as f64,
        sifted_count: tally.sifted_count,
        overflow_count: tally.overflow_count,
        miss_by_n2: tally.miss_by_n2,
        baseline_miss_given_herald: baseline,
        z_score: None,
        z_threshold,
        verdict: Verdict::Inconclusive,
        attack: *attack,
        seed,
        rng_algorithm: RNG_ALGORITHM.to_string(),
    };
    report.z_score = z_score(&report, baseline);
    report.verdict = detect_attack(&report, baseline, z_threshold);
    Ok(report)
}

fn z_score(report: &SessionReport, baseline: f64) -> Option<f64> {
    if report.herald_count == 0 {
        return None;
    }
    let sd = (baseline * (1.0 - baseline) / report.herald_count as f64).sqrt();
    let excess = report.bob_miss_given_herald - baseline;
    if sd > 0.0 {
        Some(excess / sd)
    } else if excess > 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(0.0)
    }
}

/// One-sided binomial z-test of the miss-given-herald rate against
/// `baseline_miss_given_herald`.
pub fn detect_attack(
    report: &SessionReport,
    baseline_miss_given_herald: f64,
    z_threshold: f64,
) -> Verdict {
    if report.herald_count < MIN_HERALDS_FOR_TEST {
        return Verdict::Inconclusive;
    }
    match z_score(report, baseline_miss_given_herald) {
        Some(z) if z > z_threshold => Verdict::AttackSuspected,
        Some(_) => Verdict::Clean,
        None => Verdict::Inconclusive,
    }
}

/// Closed-form probability that Bob misses given Alice's herald:
/// `sum_{n1 >= 1, n2} P(n1, n2) ratio^n2 / q1`.
pub fn expected_miss_given_herald(jd: &JointDistribution, attack: &AttackModel) -> Result<f64> {
    let q = threshold_probs(jd)?;
    if q.q1 <= 0.0 {
        return Err(Error::NoHeraldEvents);
    }
    Ok(expected_miss_joint(jd, attack) / q.q1)
}

/// Closed-form joint probability of a herald with no photon reaching Bob.
pub fn expected_miss_joint(jd: &JointDistribution, attack: &AttackModel) -> f64 {
    let ratio = attack.effective_ratio();
    (1..=jd.n_max())
        .map(|n1| {
            jd.row(n1)
                .iter()
                .enumerate()
                .map(|(n2, p)| p * ratio.powi(n2 as i32))
                .sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{SqueezedInput, TruncationPolicy};
    use crate::stats::joint_distribution;

    fn reference_jd() -> JointDistribution {
        let input = SqueezedInput::new(1.0, 0.5).unwrap();
        joint_distribution(&input, &TruncationPolicy::auto(&input).unwrap()).unwrap()
    }

    #[test]
    fn empty_session_is_rejected() {
        assert_eq!(
            simulate_session(&reference_jd(), 0, &AttackModel::none(), 1),
            Err(Error::EmptySession)
        );
    }

    #[test]
    fn bad_ratio_is_rejected() {
        assert!(AttackModel::beam_splitter(1.5).is_err());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let jd = reference_jd();
        let a = simulate_session(&jd, 200_000, &AttackModel::none(), 7).unwrap();
        let b = simulate_session(&jd, 200_000, &AttackModel::none(), 7).unwrap();
        assert_eq!(a, b);
        let c = simulate_session(&jd, 200_000, &AttackModel::none(), 8).unwrap();
        assert_ne!(a.herald_count, c.herald_count);
    }

    #[test]
    fn zero_ratio_attack_is_no_attack() {
        let jd = reference_jd();
        let clean = simulate_tally(&jd, 100_000, &AttackModel::none(), 3).unwrap();
        let zero =
            simulate_tally(&jd, 100_000, &AttackModel::beam_splitter(0.0).unwrap(), 3).unwrap();
        assert_eq!(clean, zero);
    }

    #[test]
    fn closed_form_miss_rates() {
        let jd = reference_jd();
        let q = threshold_probs(&jd).unwrap();
        let clean = expected_miss_given_herald(&jd, &AttackModel::none()).unwrap();
        assert!((clean - (q.q1 - q.q2) / q.q1).abs() < 1e-14);
        assert!((clean - 0.145).abs() < 0.002);
        // the one-photon part of the attacked excess is q3 / 2
        let attacked = expected_miss_joint(&jd, &AttackModel::beam_splitter(0.5).unwrap());
        assert!(attacked - q.baseline_miss >= 0.5 * q.q3);
    }

    #[test]
    fn tiny_sessions_are_inconclusive() {
        let jd = reference_jd();
        let mut r = simulate_session(&jd, 100, &AttackModel::none(), 1).unwrap();
        assert!(r.herald_count < MIN_HERALDS_FOR_TEST);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        r.herald_count = 50;
        r.bob_miss_given_herald = 0.9;
        assert_eq!(detect_attack(&r, 0.145, 5.0), Verdict::Inconclusive);
    }

    #[test]
    fn report_json_uses_snake_case() {
        let jd = reference_jd();
        let r = simulate_session(&jd, 1000, &AttackModel::beam_splitter(0.5).unwrap(), 1).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        for key in [
            "\"bob_miss_given_herald\"",
            "\"herald_count\"",
            "\"balanced_beam_splitter\"",
            "\"rng_algorithm\"",
        ] {
            assert!(json.contains(key), "{key} missing from {json}");
        }
        let back: SessionReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
