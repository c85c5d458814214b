//! Byte-stable text output: 12 significant digits, '.' decimal separator,
//! '\n' line endings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bands::BandSolution;
use crate::stats::{JointDistribution, SweepRow};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` with 12 significant digits: fixed notation for
/// `1e-4 <= |x| < 1e12`, scientific otherwise.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let exponent: i32 = sci[sci.find('e').expect("scientific output") + 1..]
        .parse()
        .expect("integer exponent");
    if (-4..12).contains(&exponent) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

pub fn joint_csv(jd: &JointDistribution) -> String {
    let mut out = String::from("n1,n2,p\n");
    let side = jd.n_max() + 1;
    for n1 in 0..side {
        for (n2, p) in jd.row(n1).iter().enumerate() {
            let _ = writeln!(out, "{n1},{n2},{}", format_number(*p));
        }
    }
    out
}

/// Columns `r, p11, p1, p_single, status`; failed points keep their row with
/// empty values and the error in `status`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("r,p11,p1,p_single,status\n");
    for row in rows {
        match &row.values {
            Ok(v) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},ok",
                    format_number(row.r),
                    format_number(v.p11),
                    format_number(v.p1),
                    format_number(v.p_single)
                );
            }
            Err(e) => {
                let status = e.to_string().replace([',', '\n'], ";");
                let _ = writeln!(out, "{},,,,{status}", format_number(row.r));
            }
        }
    }
    out
}

pub fn bands_csv(bands: &[BandSolution]) -> String {
    let mut out = String::from("band_index,k_tilde,omega_tilde,vg_over_c\n");
    for band in bands {
        for s in &band.samples {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                band.band_index,
                format_number(s.k_tilde),
                format_number(s.omega_tilde),
                format_number(s.vg_over_c)
            );
        }
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{SqueezedInput, TruncationPolicy};
    use crate::stats::joint_distribution;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(0.417197), "0.417197000000");
        assert_eq!(format_number(1.0), "1.00000000000");
        assert_eq!(format_number(-2.5e-3), "-0.00250000000000");
        assert_eq!(format_number(3.13e8), "313000000.000");
        assert_eq!(format_number(1e-5), "1.00000000000e-5");
        assert_eq!(format_number(2.0e15), "2.00000000000e15");
        assert_eq!(format_number(0.0), "0");
    }

    #[test]
    fn rounding_across_a_decade_keeps_digit_count() {
        // rounds up to 1.0e-4 and must switch to fixed notation
        assert_eq!(format_number(9.99999999999999e-5), "0.000100000000000");
        assert_eq!(format_number(999_999_999_999.9), "1.00000000000e12");
    }

    #[test]
    fn csv_lines_are_newline_terminated() {
        let input = SqueezedInput::new(0.0, 0.0).unwrap();
        let jd = joint_distribution(&input, &TruncationPolicy::new(2, 1e-8).unwrap()).unwrap();
        let csv = joint_csv(&jd);
        assert!(!csv.contains('\r'));
        assert_eq!(csv.lines().count(), 1 + 9);
        assert_eq!(csv.lines().nth(1), Some("0,0,1.00000000000"));
    }
}
