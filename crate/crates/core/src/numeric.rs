//! Small numerical kernels shared by the physics modules: log-factorials,
//! scalar root bracketing and 1D maximisation.

/// Table of `ln(n!)` for `n = 0..=max`.
///
/// Built by a compensated running sum of `ln k`, which keeps the absolute
/// error at the level of one ulp of the largest entry.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(0.0);
        let mut sum = 0.0_f64;
        let mut comp = 0.0_f64;
        for k in 1..=max {
            let y = (k as f64).ln() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            table.push(sum);
        }
        Self { table }
    }

    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.table[n]
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    /// `ln C(n, k)`.
    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

/// `exponent * ln(x)` with the convention `0^0 = 1`.
#[inline]
pub(crate) fn ln_pow(ln_x: f64, exponent: usize) -> f64 {
    if exponent == 0 {
        0.0
    } else {
        exponent as f64 * ln_x
    }
}

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign.
///
/// Stops when the bracket is narrower than `rel_tol * max(|lo|, |hi|, tiny)`
/// or when the bracket cannot be halved further.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let f_hi = f(hi);
    if f_hi == 0.0 {
        return hi;
    }
    debug_assert!(f_lo.signum() != f_hi.signum(), "bisect: not a bracket");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        if hi - lo <= rel_tol * scale || mid <= lo || mid >= hi {
            return mid;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    abs_tol: f64,
) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > abs_tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Locate the maximum of `f` by a coarse scan of `grid` followed by golden
/// section refinement on the two neighbouring grid cells.
pub fn refine_max<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64], abs_tol: f64) -> (f64, f64) {
    assert!(!grid.is_empty(), "refine_max: empty grid");
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    if grid.len() == 1 {
        return (grid[0], values[0]);
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    golden_section_max(f, lo, hi, abs_tol)
}

/// Unevaluated sum `hi + lo` of two doubles (about 106 significant bits).
///
/// Only the operations the matrix-element recurrences need are provided.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Self { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        // remainder self - q1 * b, exactly via fma
        let p = q1 * b;
        let pe = q1.mul_add(b, -p);
        let (s, e) = two_sum(self.hi, -p);
        let r = s + (e - pe + self.lo);
        let q2 = r / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }
    }

    pub fn abs_hi(self) -> f64 {
        self.hi.abs()
    }
}

impl std::ops::Add for DoubleDouble {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let (t, f) = two_sum(self.lo, other.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_factorials_match_direct_products() {
        let lf = LogFactorials::new(30);
        let mut fact = 1.0_f64;
        for n in 1..=30 {
            fact *= n as f64;
            assert!((lf.get(n) - fact.ln()).abs() < 1e-12 * fact.ln().max(1.0));
        }
        assert_eq!(lf.get(0), 0.0);
        assert!((lf.ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn ln_pow_zero_exponent_is_one() {
        assert_eq!(ln_pow(f64::NEG_INFINITY, 0), 0.0);
        assert_eq!(ln_pow(f64::NEG_INFINITY, 3), f64::NEG_INFINITY);
    }

    #[test]
    fn double_double_recovers_cancelled_digits() {
        // (1 + 2^-60) - 1 is lost in f64 but kept here
        let tiny = 2f64.powi(-60);
        let x = DoubleDouble::ONE + DoubleDouble::from_f64(tiny) + DoubleDouble::from_f64(-1.0);
        assert_eq!(x.to_f64(), tiny);
        let third = DoubleDouble::ONE.div_f64(3.0);
        let back = third.mul_f64(3.0) + DoubleDouble::from_f64(-1.0);
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let x = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((x - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, v) = golden_section_max(|x| -(x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refine_max_single_point_grid() {
        let (x, v) = refine_max(|x| x * 2.0, &[0.5], 1e-6);
        assert_eq!((x, v), (0.5, 1.0));
    }
}
