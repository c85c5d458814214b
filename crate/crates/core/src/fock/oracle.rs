//! Brute-force reference for the beam-splitter output state.
//!
//! Follows the physical pipeline `B^dagger(0) S_a(-r) D_a(alpha) |0, 0>`:
//! displacement and squeezing are exponentiated on a truncated single-mode
//! space, then the beam-splitter generator `(pi/4)(a^dag b - a b^dag)` is
//! exponentiated inside each fixed-total-photon block (it conserves
//! `n1 + n2`, so restricting to a block is exact). No closed-form matrix
//! element is used.

use std::f64::consts::FRAC_PI_4;

use super::{AmplitudeMatrix, SqueezedInput, TruncationPolicy};
use crate::error::Result;

/// Extra single-mode levels kept above `2 n_max` so that reflections at the
/// truncation edge stay far from the reported box.
const ORACLE_MARGIN: usize = 80;

/// Real sparse generator stored by diagonals: `out[i] += vals[i] * v[i + offset]`.
#[derive(Debug, Clone)]
pub struct BandedGenerator {
    dim: usize,
    diagonals: Vec<(isize, Vec<f64>)>,
}

impl BandedGenerator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            diagonals: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds a diagonal; `f(i)` is the coefficient of `v[i + offset]` in `out[i]`.
    pub fn with_diagonal(mut self, offset: isize, f: impl Fn(usize) -> f64) -> Self {
        let vals = (0..self.dim)
            .map(|i| {
                let j = i as isize + offset;
                if j >= 0 && (j as usize) < self.dim {
                    f(i)
                } else {
                    0.0
                }
            })
            .collect();
        self.diagonals.push((offset, vals));
        self
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (offset, vals) in &self.diagonals {
            for (i, (o, &c)) in out.iter_mut().zip(vals).enumerate() {
                if c != 0.0 {
                    *o += c * v[(i as isize + offset) as usize];
                }
            }
        }
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                self.diagonals
                    .iter()
                    .map(|(_, vals)| vals[i].abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Dense row-major copy, for small cross-checks.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dim * self.dim];
        for (offset, vals) in &self.diagonals {
            for (i, &c) in vals.iter().enumerate() {
                let j = i as isize + offset;
                if c != 0.0 {
                    dense[i * self.dim + j as usize] += c;
                }
            }
        }
        dense
    }
}

/// `exp(G) v` by a Taylor series on `ceil(||G||)` sub-steps of norm at most one.
pub fn expm_action(gen: &BandedGenerator, v: &[f64]) -> Vec<f64> {
    let steps = gen.inf_norm().ceil().max(1.0) as usize;
    let scale = 1.0 / steps as f64;
    let mut acc = v.to_vec();
    let mut term = vec![0.0; v.len()];
    let mut next = vec![0.0; v.len()];
    for _ in 0..steps {
        term.copy_from_slice(&acc);
        for j in 1..=80 {
            gen.apply(&term, &mut next);
            let factor = scale / j as f64;
            let mut term_norm = 0.0_f64;
            for ((t, n), a) in term.iter_mut().zip(&next).zip(acc.iter_mut()) {
                *t = n * factor;
                *a += *t;
                term_norm = term_norm.max(t.abs());
            }
            let acc_norm = acc.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            if term_norm <= 1e-18 * acc_norm {
                break;
            }
        }
    }
    acc
}

fn single_mode_state(input: &SqueezedInput, dim: usize) -> Vec<f64> {
    let alpha = input.alpha();
    let half_r = 0.5 * input.r();
    // alpha (a^dag - a)
    let displace = BandedGenerator::new(dim)
        .with_diagonal(-1, |i| alpha * (i as f64).sqrt())
        .with_diagonal(1, |i| -alpha * ((i + 1) as f64).sqrt());
    // (r/2)(a^dag^2 - a^2), the generator of S(-r)
    let squeeze = BandedGenerator::new(dim)
        .with_diagonal(-2, |i| half_r * ((i * i.saturating_sub(1)) as f64).sqrt())
        .with_diagonal(2, |i| -half_r * (((i + 1) * (i + 2)) as f64).sqrt());
    let mut vac = vec![0.0; dim];
    vac[0] = 1.0;
    let displaced = expm_action(&displace, &vac);
    expm_action(&squeeze, &displaced)
}

/// `B^dagger(0) |total, 0>` in the block of fixed total photon number,
/// indexed by `n1` (with `n2 = total - n1`).
fn split_block(total: usize) -> Vec<f64> {
    let t = total;
    // -(pi/4)(a^dag b - a b^dag)
    let gen = BandedGenerator::new(t + 1)
        .with_diagonal(-1, |i| -FRAC_PI_4 * ((i * (t + 1 - i)) as f64).sqrt())
        .with_diagonal(1, |i| {
            FRAC_PI_4 * (((i + 1) * (t.saturating_sub(i))) as f64).sqrt()
        });
    let mut start = vec![0.0; t + 1];
    start[t] = 1.0;
    expm_action(&gen, &start)
}

/// Joint amplitudes by direct exponentiation of truncated operators.
pub fn oracle_state(input: &SqueezedInput, trunc: &TruncationPolicy) -> Result<AmplitudeMatrix> {
    let n_max = trunc.n_max();
    let dim = 2 * n_max + 1 + ORACLE_MARGIN;
    let psi = single_mode_state(input, dim);
    let side = n_max + 1;
    let mut entries = vec![0.0; side * side];
    for (total, &amp) in psi.iter().enumerate().take(2 * n_max + 1) {
        if amp == 0.0 {
            continue;
        }
        let block = split_block(total);
        let lo = total.saturating_sub(n_max);
        for (n1, &b) in block.iter().enumerate().take(total.min(n_max) + 1).skip(lo) {
            entries[n1 * side + (total - n1)] = amp * b;
        }
    }
    let matrix = AmplitudeMatrix::from_entries(n_max, entries);
    trunc.check(matrix.captured_mass())?;
    Ok(matrix)
}
