use rayon::prelude::*;

use super::{significant_len, AmplitudeMatrix, SqueezedInput, TruncationPolicy};
use crate::error::Result;
use crate::numeric::{ln_pow, DoubleDouble, LogFactorials};

/// Inner sums stop once both trailing `|C_l|` fall below this.
const INNER_AMPLITUDE_FLOOR: f64 = 1e-15;
/// Hard cap on how far inner sums may run past `n_max`.
const INNER_EXTRA_CAP: usize = 800;

/// Products `C_l C_k` below this are dropped from the outer sum.
const NEGLIGIBLE_WEIGHT: f64 = 1e-22;

/// Running sum with Neumaier compensation.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Matrix elements of `S(-s)` and `S_ab(-s)` for a fixed squeeze magnitude
/// `s`.
///
/// The leading term of each alternating sum is evaluated in log space; the
/// remaining terms follow from it by their exact rational ratio (a multiple
/// of `sinh^2 s`) and are accumulated in double-double precision. The sums
/// cancel heavily at large photon numbers, and this keeps them accurate well
/// past the point where a plain f64 sum collapses.
#[derive(Debug, Clone)]
pub struct SqueezeKernel {
    lf: LogFactorials,
    ln_tanh: f64,
    ln_half_tanh: f64,
    ln_cosh: f64,
    sinh_sq: f64,
}

/// Rescaling threshold for the running term ratio.
const RATIO_RESCALE: f64 = 1e200;

/// `sign * exp(ln_first) * sum_j prod_{i<j} factor * num(i) / den(i)`, with
/// integer `num`/`den` so every ratio is applied without rounding. Products
/// are kept in range by folding large factors into the log prefactor.
fn ratio_series(
    ln_first: f64,
    negative_first: bool,
    terms: usize,
    factor: f64,
    mut ratio: impl FnMut(usize) -> (usize, usize),
) -> f64 {
    if ln_first == f64::NEG_INFINITY {
        return 0.0;
    }
    let mut ln_scale = ln_first;
    let mut term = DoubleDouble::ONE;
    let mut acc = DoubleDouble::ONE;
    for j in 1..terms {
        let (num, den) = ratio(j - 1);
        term = term.mul_f64(factor).mul_f64(num as f64).div_f64(den as f64);
        if term.abs_hi() == 0.0 {
            break;
        }
        acc = acc + term;
        if term.abs_hi() > RATIO_RESCALE {
            term = term.div_f64(RATIO_RESCALE);
            acc = acc.div_f64(RATIO_RESCALE);
            ln_scale += RATIO_RESCALE.ln();
        }
    }
    let value = acc.to_f64() * ln_scale.exp();
    if negative_first {
        -value
    } else {
        value
    }
}

impl SqueezeKernel {
    /// `max_index` bounds every photon number later passed to the kernel.
    pub fn new(s: f64, max_index: usize) -> Self {
        let ln_tanh = s.tanh().ln();
        Self {
            lf: LogFactorials::new(max_index),
            ln_tanh,
            ln_half_tanh: ln_tanh - std::f64::consts::LN_2,
            ln_cosh: s.cosh().ln(),
            sinh_sq: s.sinh().powi(2),
        }
    }

    /// `<n|S(-s)|m>`: the double sum over `l <= n/2`, `k <= m/2` restricted
    /// by `n - 2l = m - 2k`.
    pub fn single(&self, n: usize, m: usize) -> f64 {
        if (n + m) % 2 == 1 {
            return 0.0;
        }
        let lf = &self.lf;
        // k - l = (m - n)/2 is fixed; start from the smallest admissible pair
        let (l0, k0) = if n >= m {
            ((n - m) / 2, 0)
        } else {
            (0, (m - n) / 2)
        };
        let out0 = n - 2 * l0;
        let ln_first = -lf.get(l0) - lf.get(k0)
            + ln_pow(self.ln_half_tanh, k0 + l0)
            + 0.5 * (lf.get(m) + lf.get(n))
            - lf.get(out0)
            - (0.5 + out0 as f64) * self.ln_cosh;
        let terms = out0 / 2 + 1;
        ratio_series(ln_first, k0 % 2 == 1, terms, -0.25 * self.sinh_sq, |j| {
            let (l, k, out) = (l0 + j, k0 + j, out0 - 2 * j);
            (out * (out - 1), (l + 1) * (k + 1))
        })
    }

    /// `<n1, n2|S_ab(-s)|l, k>`: sum over `m <= min(l, k)` with
    /// `n = n1 - l + m` constrained to `0..=min(n1, n2)`.
    pub fn two_mode(&self, n1: usize, n2: usize, l: usize, k: usize) -> f64 {
        if n1 + k != n2 + l {
            return 0.0;
        }
        let lf = &self.lf;
        // m >= l - n1 keeps n >= 0; m <= min(l, k) already implies n <= min(n1, n2)
        let m_lo = l.saturating_sub(n1);
        let m_hi = l.min(k);
        let n_lo = n1 + m_lo - l;
        let ln_first = ln_pow(self.ln_tanh, m_lo + n_lo)
            - lf.get(m_lo)
            - lf.get(n_lo)
            - (l + k + 1 - 2 * m_lo) as f64 * self.ln_cosh
            + 0.5 * (lf.get(l) + lf.get(k) + lf.get(n1) + lf.get(n2))
            - lf.get(l - m_lo)
            - lf.get(k - m_lo);
        ratio_series(
            ln_first,
            m_lo % 2 == 1,
            m_hi - m_lo + 1,
            -self.sinh_sq,
            |j| {
                let (m, n) = (m_lo + j, n_lo + j);
                ((l - m) * (k - m), (m + 1) * (n + 1))
            },
        )
    }
}

/// `<m|D(beta)|0> = exp(-beta^2/2) beta^m / sqrt(m!)` for `m = 0..=n_max`.
pub fn coherent_amplitudes(beta: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut d = (-0.5 * beta * beta).exp();
    out.push(d);
    for m in 1..=n_max {
        d *= beta / (m as f64).sqrt();
        out.push(d);
    }
    out
}

/// Dense `<n|S(-s)|m>` for `0 <= n, m <= n_max`, row `n`, column `m`.
pub fn squeeze_matrix(s: f64, n_max: usize) -> Vec<Vec<f64>> {
    let kernel = SqueezeKernel::new(s, n_max);
    (0..=n_max)
        .map(|n| (0..=n_max).map(|m| kernel.single(n, m)).collect())
        .collect()
}

/// `<n1, n2|S_ab(-s)|l, k>`.
pub fn two_mode_squeeze_element(n1: usize, n2: usize, l: usize, k: usize, s: f64) -> f64 {
    let kernel = SqueezeKernel::new(s, n1.max(n2).max(l).max(k));
    kernel.two_mode(n1, n2, l, k)
}

/// Per-mode coefficients `C_l = sum_m <l|S(-r/2)|m> D_m(alpha/sqrt2)` with
/// the inner cutoff extended past `n_max` until the coefficients vanish.
struct ModeCoefficients {
    kernel: SqueezeKernel,
    c: Vec<f64>,
}

impl ModeCoefficients {
    fn new(input: &SqueezedInput, n_max: usize) -> Self {
        let cap = n_max + INNER_EXTRA_CAP;
        let kernel = SqueezeKernel::new(0.5 * input.r(), cap + n_max + 2);
        let d = coherent_amplitudes(input.alpha() / std::f64::consts::SQRT_2, cap);
        let m_eff = significant_len(&d, 1e-18);
        let mut c = Vec::with_capacity(n_max + 1);
        for l in 0..=cap {
            let mut acc = CompensatedSum::default();
            for (m, dm) in d.iter().enumerate().take(m_eff) {
                if (l + m) % 2 == 0 && *dm != 0.0 {
                    acc.add(kernel.single(l, m) * dm);
                }
            }
            c.push(acc.value());
            if l >= n_max.max(2) {
                let tail = c[l].abs().max(c[l - 1].abs());
                if tail < INNER_AMPLITUDE_FLOOR {
                    break;
                }
            }
        }
        Self { kernel, c }
    }

    fn inner(&self) -> usize {
        self.c.len() - 1
    }

    fn amplitude(&self, n1: usize, n2: usize) -> f64 {
        let inner = self.inner();
        let mut acc = CompensatedSum::default();
        // k - l = n2 - n1 is fixed by the pair selection rule
        let l_start = n1.saturating_sub(n2);
        for l in l_start..=inner {
            let k = l + n2 - n1;
            if k > inner {
                break;
            }
            let weight = self.c[l] * self.c[k];
            // |<n1, n2|S_ab|l, k>| <= 1, so such weights cannot matter
            if weight.abs() < NEGLIGIBLE_WEIGHT {
                continue;
            }
            acc.add(self.kernel.two_mode(n1, n2, l, k) * weight);
        }
        acc.value()
    }
}

/// Closed-form joint amplitudes of the beam-splitter output.
///
/// Fails with a truncation error when the captured mass in the
/// `(n_max + 1)^2` box falls short of one by more than the tolerance.
pub fn output_amplitudes(
    input: &SqueezedInput,
    trunc: &TruncationPolicy,
) -> Result<AmplitudeMatrix> {
    let n_max = trunc.n_max();
    let coeffs = ModeCoefficients::new(input, n_max);
    let entries: Vec<f64> = (0..=n_max)
        .into_par_iter()
        .flat_map_iter(|n1| {
            let coeffs = &coeffs;
            (0..=n_max).map(move |n2| coeffs.amplitude(n1, n2))
        })
        .collect();
    let matrix = AmplitudeMatrix::from_entries(n_max, entries);
    trunc.check(matrix.captured_mass())?;
    Ok(matrix)
}

/// Closed-form amplitudes `<n1, n2|psi_out>` for one fixed `n1` and
/// `n2 = 0..=n_max`, without building the full matrix. No tail check.
pub fn output_row(input: &SqueezedInput, n1: usize, n_max: usize) -> Vec<f64> {
    let coeffs = ModeCoefficients::new(input, n_max.max(n1));
    (0..=n_max).map(|n2| coeffs.amplitude(n1, n2)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_displacement_is_identity() {
        assert_eq!(coherent_amplitudes(0.0, 4), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn coherent_ground_amplitude_at_half_alpha() {
        // alpha = 1/2, beta = alpha/sqrt2: D_0 = exp(-1/16)
        let d = coherent_amplitudes(0.5 / 2f64.sqrt(), 3);
        assert!((d[0] - (-1.0f64 / 16.0).exp()).abs() < 1e-15);
        assert!((d[0] - 0.939_413).abs() < 1e-5);
    }

    #[test]
    fn coherent_normalisation() {
        for beta in [0.0, 0.3, 1.0, 2.5, -1.7] {
            let d = coherent_amplitudes(beta, 60);
            let norm: f64 = d.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12, "beta={beta} norm={norm}");
        }
    }

    #[test]
    fn zero_squeeze_is_identity() {
        let s = squeeze_matrix(0.0, 6);
        for (n, row) in s.iter().enumerate() {
            for (m, &v) in row.iter().enumerate() {
                assert_eq!(v, if n == m { 1.0 } else { 0.0 });
            }
        }
        for (n1, n2, l, k) in [(0, 0, 0, 0), (2, 3, 2, 3), (2, 3, 3, 4), (1, 0, 0, 1)] {
            let expect = if n1 == l && n2 == k { 1.0 } else { 0.0 };
            assert_eq!(two_mode_squeeze_element(n1, n2, l, k, 0.0), expect);
        }
    }

    #[test]
    fn squeeze_parity_selection() {
        let s = squeeze_matrix(0.7, 12);
        for n in 0..=12 {
            for m in 0..=12 {
                if (n + m) % 2 == 1 {
                    assert_eq!(s[n][m], 0.0);
                }
            }
        }
    }

    #[test]
    fn two_mode_pair_selection() {
        let kernel = SqueezeKernel::new(0.5, 20);
        for n1 in 0..6 {
            for n2 in 0..6 {
                for l in 0..6 {
                    for k in 0..6 {
                        if n1 as isize - l as isize != n2 as isize - k as isize {
                            assert_eq!(kernel.two_mode(n1, n2, l, k), 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn vacuum_elements_closed_forms() {
        // <0|S(-1/2)|0> = 1/sqrt(cosh 0.5); <0,0|S_ab(-1/2)|0,0> = 1/cosh 0.5
        let s = squeeze_matrix(0.5, 2);
        assert!((s[0][0] - 0.5f64.cosh().powf(-0.5)).abs() < 1e-15);
        assert!((s[0][0] - 0.941_71).abs() < 1e-5);
        let e = two_mode_squeeze_element(0, 0, 0, 0, 0.5);
        assert!((e - 1.0 / 0.5f64.cosh()).abs() < 1e-15);
        assert!((e - 0.886_82).abs() < 1e-5);
    }

    #[test]
    fn squeezed_vacuum_column() {
        // <2l|S(-s)|0> = tanh^l(s) sqrt((2l)!) / (2^l l! sqrt(cosh s))
        let s = 0.8_f64;
        let col = squeeze_matrix(s, 40);
        let lf = LogFactorials::new(40);
        for l in 0..=20 {
            let ln = l as f64 * (s.tanh().ln() - std::f64::consts::LN_2) + 0.5 * lf.get(2 * l)
                - lf.get(l)
                - 0.5 * s.cosh().ln();
            assert!((col[2 * l][0] - ln.exp()).abs() < 1e-10, "l={l}");
        }
    }

    #[test]
    fn single_mode_matrix_is_orthogonal_in_the_interior() {
        // columns of a unitary: inner products of low columns converge to delta
        let s = squeeze_matrix(0.4, 80);
        for a in 0..6 {
            for b in 0..6 {
                let dot: f64 = (0..=80).map(|n| s[n][a] * s[n][b]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12, "a={a} b={b} dot={dot}");
            }
        }
    }

    #[test]
    fn vacuum_in_vacuum_out() {
        let input = SqueezedInput::new(0.0, 0.0).unwrap();
        let amps = output_amplitudes(&input, &TruncationPolicy::default()).unwrap();
        assert_eq!(amps.get(0, 0), 1.0);
        assert_eq!(amps.captured_mass(), 1.0);
    }

    #[test]
    fn tail_check_reports_small_box() {
        let input = SqueezedInput::new(1.0, 0.5).unwrap();
        let trunc = TruncationPolicy::new(4, 1e-8).unwrap();
        assert!(matches!(
            output_amplitudes(&input, &trunc),
            Err(crate::Error::Truncation { n_max: 4, .. })
        ));
    }

    #[test]
    fn row_matches_matrix() {
        let input = SqueezedInput::new(1.0, 0.5).unwrap();
        let trunc = TruncationPolicy::auto(&input).unwrap();
        let amps = output_amplitudes(&input, &trunc).unwrap();
        let row = output_row(&input, 1, trunc.n_max());
        for (n2, a) in row.iter().enumerate() {
            assert!((a - amps.get(1, n2)).abs() < 1e-15);
        }
    }
}
