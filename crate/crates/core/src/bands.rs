//! Band structure of a 1D two-layer photonic crystal.
//!
//! Internally everything is in normalized units: `w = omega * period / (2 pi c)`
//! and `q = k * period`. The dispersion relation is
//!
//! `F(w, q) = cos q - cos(pa) cos(pb) + g sin(pa) sin(pb)`,
//!
//! with `pa = 2 pi w (l_a / period) n_a`, `pb` likewise and
//! `g = (n_a^2 + n_b^2) / (2 n_a n_b)`. This is the standard transfer-matrix
//! relation `cos q = cos pa cos pb - g sin pa sin pb` moved to one side, so a
//! single sign convention serves both readings.
//!
//! Bands are numbered from 1 at the bottom. At `q = 0` the lowest band starts
//! at `w = 0`, which is counted as the band-1 root.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{bisect, golden_section_max};
use crate::source::SPEED_OF_LIGHT;

/// Default bracketing resolution in points per unit of `w`.
pub const DEFAULT_SCAN_RESOLUTION: usize = 4000;
const ROOT_REL_TOL: f64 = 1e-15;
const DOUBLE_ROOT_TOL: f64 = 1e-12;

/// Which form of the dispersion relation the band solver uses.
pub const DISPERSION_FORM_NOTE: &str =
    "cos(Lk) - cos(pa)cos(pb) + g sin(pa)sin(pb) = 0, identical \
    to the standard transfer-matrix form cos(Lk) = cos(pa)cos(pb) - g sin(pa)sin(pb); it \
    reproduces the band-4 edge at w = 1.184";

/// Two-layer crystal: layer widths, relative permittivities and the
/// nonlinear medium used by the source model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSpec {
    /// Width of layer A, m.
    pub l_a: f64,
    /// Width of layer B, m; zero gives a homogeneous medium.
    pub l_b: f64,
    pub eps_rel_a: f64,
    pub eps_rel_b: f64,
    /// `chi2 / eps0`, m/V.
    pub chi2_tilde: f64,
    /// Total length of nonlinear layers, m.
    pub l_nl: f64,
}

impl CrystalSpec {
    pub fn new(
        l_a: f64,
        l_b: f64,
        eps_rel_a: f64,
        eps_rel_b: f64,
        chi2_tilde: f64,
        l_nl: f64,
    ) -> Result<Self> {
        let spec = Self {
            l_a,
            l_b,
            eps_rel_a,
            eps_rel_b,
            chi2_tilde,
            l_nl,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Air and LiNbO3 (n = 2.22) layers of 550 nm each, 50 um of nonlinear
    /// material with `chi2 / eps0 = 25.2 pm/V`.
    pub fn lithium_niobate_stack() -> Self {
        Self {
            l_a: 5.5e-7,
            l_b: 5.5e-7,
            eps_rel_a: 1.0,
            eps_rel_b: 2.22 * 2.22,
            chi2_tilde: 25.2e-12,
            l_nl: 5.0e-5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.l_a,
            self.l_b,
            self.eps_rel_a,
            self.eps_rel_b,
            self.chi2_tilde,
            self.l_nl,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(invalid("crystal parameters must be finite"));
        }
        if self.l_a <= 0.0 || self.l_b < 0.0 {
            return Err(invalid(format!(
                "layer widths must satisfy l_a > 0, l_b >= 0 (got {}, {})",
                self.l_a, self.l_b
            )));
        }
        if self.eps_rel_a < 1.0 || self.eps_rel_b < 1.0 {
            return Err(invalid("relative permittivities must be >= 1"));
        }
        if self.chi2_tilde < 0.0 {
            return Err(invalid("chi2_tilde must be >= 0"));
        }
        if self.l_nl <= 0.0 {
            return Err(invalid("nonlinear length must be > 0"));
        }
        Ok(())
    }

    /// `l_a + l_b`, m.
    pub fn period(&self) -> f64 {
        self.l_a + self.l_b
    }

    pub fn n_a(&self) -> f64 {
        self.eps_rel_a.sqrt()
    }

    pub fn n_b(&self) -> f64 {
        self.eps_rel_b.sqrt()
    }

    /// `omega` in rad/s from normalized `w`.
    pub fn omega_from_tilde(&self, w: f64) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT * w / self.period()
    }

    pub fn omega_to_tilde(&self, omega: f64) -> f64 {
        omega * self.period() / (2.0 * PI * SPEED_OF_LIGHT)
    }

    /// `k` in 1/m from normalized `q`.
    pub fn k_from_tilde(&self, q: f64) -> f64 {
        q / self.period()
    }

    pub fn k_to_tilde(&self, k: f64) -> f64 {
        k * self.period()
    }

    fn normalized(&self) -> Dispersion {
        let (na, nb) = (self.n_a(), self.n_b());
        let period = self.period();
        Dispersion {
            pa: 2.0 * PI * (self.l_a / period) * na,
            pb: 2.0 * PI * (self.l_b / period) * nb,
            g: (na * na + nb * nb) / (2.0 * na * nb),
            eps_eff: (self.l_a * self.eps_rel_a + self.l_b * self.eps_rel_b) / period,
        }
    }
}

/// `F(w, q)` and its partials in normalized units.
#[derive(Debug, Clone, Copy)]
struct Dispersion {
    /// `d(phase_a)/dw`.
    pa: f64,
    pb: f64,
    g: f64,
    /// Layer-averaged permittivity; sets the slope of band 1 at `w = 0`.
    eps_eff: f64,
}

impl Dispersion {
    fn residual(&self, w: f64, q: f64) -> f64 {
        let (sa, ca) = (self.pa * w).sin_cos();
        let (sb, cb) = (self.pb * w).sin_cos();
        q.cos() - ca * cb + self.g * sa * sb
    }

    fn d_omega(&self, w: f64) -> f64 {
        let (sa, ca) = (self.pa * w).sin_cos();
        let (sb, cb) = (self.pb * w).sin_cos();
        self.pa * sa * cb + self.pb * ca * sb + self.g * (self.pa * ca * sb + self.pb * sa * cb)
    }

    /// Scale against which `dF/dw` is judged to vanish.
    fn d_omega_scale(&self) -> f64 {
        (self.pa + self.pb) * (1.0 + self.g)
    }

    /// Roots of `F(., q)` in increasing order, each flagged when it is a
    /// touching (double) root; stops after `wanted` roots or when the scan
    /// passes `w_cap`.
    fn roots(&self, q: f64, wanted: usize, per_unit: usize, w_cap: f64) -> Result<Vec<Root>> {
        let h = 1.0 / per_unit as f64;
        let f = |w: f64| self.residual(w, q);
        let simple = |w| Root { w, touching: false };
        let double = |w| [Root { w, touching: true }; 2];
        let mut roots = Vec::with_capacity(wanted + 1);
        let mut prev_w = 0.0;
        let mut prev_f = f(0.0);
        if prev_f == 0.0 {
            roots.push(simple(0.0));
        }
        let mut before_prev_f = f64::NAN;
        let mut i = 1usize;
        while roots.len() < wanted {
            let w = i as f64 * h;
            if w > w_cap {
                return Err(Error::InsufficientBracket {
                    found: roots.len(),
                    wanted,
                    scanned_to: w_cap,
                });
            }
            let fw = f(w);
            if fw == 0.0 {
                // the next step decides whether this is a crossing or a touch
            } else if prev_f == 0.0 {
                if i >= 2 && before_prev_f * fw > 0.0 {
                    roots.extend(double(prev_w));
                } else if i >= 2 {
                    roots.push(simple(prev_w));
                }
            } else if prev_f * fw < 0.0 {
                roots.push(simple(bisect(f, prev_w, w, ROOT_REL_TOL)));
            } else if i >= 2
                && before_prev_f * prev_f > 0.0
                && prev_f.abs() < before_prev_f.abs()
                && prev_f.abs() < fw.abs()
            {
                // |F| dips without a sign change: a hidden pair or a touching root
                let lo = prev_w - h;
                let s = prev_f.signum();
                let (w_min, neg_val) = golden_section_max(|x| -s * f(x), lo, w, 1e-15);
                let dip = -neg_val;
                if dip < 0.0 {
                    roots.push(simple(bisect(f, lo, w_min, ROOT_REL_TOL)));
                    roots.push(simple(bisect(f, w_min, w, ROOT_REL_TOL)));
                } else if dip <= DOUBLE_ROOT_TOL {
                    roots.extend(double(w_min));
                }
            }
            before_prev_f = prev_f;
            prev_f = fw;
            prev_w = w;
            i += 1;
        }
        roots.truncate(wanted);
        Ok(roots)
    }
}

#[derive(Debug, Clone, Copy)]
struct Root {
    w: f64,
    touching: bool,
}

/// `F` at physical `omega` (rad/s) and `k` (1/m), evaluated in normalized
/// units; at `omega = 0` it equals `cos(period k) - 1`.
pub fn dispersion_residual(spec: &CrystalSpec, omega: f64, k: f64) -> f64 {
    spec.normalized()
        .residual(spec.omega_to_tilde(omega), spec.k_to_tilde(k))
}

/// Normalized version of [`dispersion_residual`].
pub fn dispersion_residual_tilde(spec: &CrystalSpec, w: f64, q: f64) -> f64 {
    spec.normalized().residual(w, q)
}

/// The `n_bands` lowest normalized band frequencies at normalized `q`.
pub fn band_frequencies_tilde(
    spec: &CrystalSpec,
    q: f64,
    n_bands: usize,
    per_unit: usize,
) -> Result<Vec<f64>> {
    Ok(band_roots(spec, q, n_bands, per_unit)?
        .into_iter()
        .map(|r| r.w)
        .collect())
}

fn check_query(spec: &CrystalSpec, q: f64, n_bands: usize, per_unit: usize) -> Result<()> {
    spec.validate()?;
    if n_bands == 0 {
        return Err(invalid("n_bands must be >= 1"));
    }
    if per_unit == 0 {
        return Err(invalid("scan resolution must be >= 1"));
    }
    if !(0.0..=PI).contains(&q) {
        return Err(invalid(format!("k * period must lie in [0, pi], got {q}")));
    }
    Ok(())
}

fn band_roots(spec: &CrystalSpec, q: f64, n_bands: usize, per_unit: usize) -> Result<Vec<Root>> {
    check_query(spec, q, n_bands, per_unit)?;
    // every band occupies at least half a unit of w, so this bound is generous
    let w_cap = 2.0 * (n_bands as f64 + 1.0) + 10.0;
    spec.normalized().roots(q, n_bands, per_unit, w_cap)
}

/// The `n_bands` lowest band frequencies (rad/s) at wavenumber `k` (1/m),
/// `0 <= k <= pi / period`.
pub fn band_frequencies(spec: &CrystalSpec, k: f64, n_bands: usize) -> Result<Vec<f64>> {
    let q = clamp_zone(spec.k_to_tilde(k));
    let w = band_frequencies_tilde(spec, q, n_bands, DEFAULT_SCAN_RESOLUTION)?;
    Ok(w.into_iter().map(|w| spec.omega_from_tilde(w)).collect())
}

/// Absorbs the rounding of `pi / period * period`.
fn clamp_zone(q: f64) -> f64 {
    if q > PI && q - PI < 1e-12 {
        PI
    } else {
        q
    }
}

fn band_root(spec: &CrystalSpec, band_index: usize, q: f64) -> Result<Root> {
    if band_index == 0 {
        return Err(invalid("band_index is 1-based"));
    }
    let roots = band_roots(spec, q, band_index, DEFAULT_SCAN_RESOLUTION)?;
    Ok(roots[band_index - 1])
}

fn band_w(spec: &CrystalSpec, band_index: usize, q: f64) -> Result<f64> {
    Ok(band_root(spec, band_index, q)?.w)
}

/// `|dw/dq|` on a band in normalized units; `v_g / c = 2 pi |dw/dq|`.
fn slope_tilde(spec: &CrystalSpec, band_index: usize, q: f64) -> Result<f64> {
    let disp = spec.normalized();
    let root = band_root(spec, band_index, q)?;
    let w = root.w;
    if w == 0.0 {
        // long-wavelength limit of band 1: effective medium
        return Ok(1.0 / (2.0 * PI * disp.eps_eff.sqrt()));
    }
    let f_w = disp.d_omega(w);
    if !root.touching && f_w.abs() > 1e-9 * disp.d_omega_scale() {
        // dF/dq = -sin q
        return Ok((q.sin() / f_w).abs());
    }
    let at_edge = q == 0.0 || q == PI;
    if !at_edge {
        return Err(Error::DegeneratePoint {
            k_tilde: q,
            omega_tilde: w,
        });
    }
    // touching bands at a zone edge: quadratic extrapolation of the slope
    // from three interior points, all of them simple roots
    let h = 1e-5;
    let step = if q == 0.0 { h } else { -h };
    let mut w_in = [0.0; 3];
    for (j, w_j) in w_in.iter_mut().enumerate() {
        *w_j = band_w(spec, band_index, q + step * (j + 1) as f64)?;
    }
    Ok(((-5.0 * w_in[0] + 8.0 * w_in[1] - 3.0 * w_in[2]) / (2.0 * h)).abs())
}

/// Group velocity `|d omega / d k|` (m/s) on band `band_index` at `k` (1/m),
/// by implicit differentiation of the dispersion relation.
pub fn group_velocity(spec: &CrystalSpec, band_index: usize, k: f64) -> Result<f64> {
    let q = clamp_zone(spec.k_to_tilde(k));
    Ok(2.0 * PI * SPEED_OF_LIGHT * slope_tilde(spec, band_index, q)?)
}

/// Normalized group velocity `v_g / c` at normalized `q`.
pub fn group_velocity_over_c(spec: &CrystalSpec, band_index: usize, q: f64) -> Result<f64> {
    Ok(2.0 * PI * slope_tilde(spec, band_index, clamp_zone(q))?)
}

/// Central-difference estimate of `v_g / c`, relative step `rel_step` in `q`.
pub fn group_velocity_over_c_fd(
    spec: &CrystalSpec,
    band_index: usize,
    q: f64,
    rel_step: f64,
) -> Result<f64> {
    let dq = rel_step * q;
    let hi = band_w(spec, band_index, q + dq)?;
    let lo = band_w(spec, band_index, q - dq)?;
    Ok(2.0 * PI * ((hi - lo) / (2.0 * dq)).abs())
}

/// One sample of a band diagram, normalized units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandSample {
    pub k_tilde: f64,
    pub omega_tilde: f64,
    pub vg_over_c: f64,
}

/// A sampled band with physical edge frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSolution {
    pub band_index: usize,
    pub samples: Vec<BandSample>,
    /// `omega` (rad/s) at `k = 0` and at `k = pi / period`.
    pub edges: (f64, f64),
}

impl BandSolution {
    /// Physical `(k [1/m], omega [rad/s], v_g [m/s])` triples.
    pub fn physical_samples(&self, spec: &CrystalSpec) -> Vec<(f64, f64, f64)> {
        self.samples
            .iter()
            .map(|s| {
                (
                    spec.k_from_tilde(s.k_tilde),
                    spec.omega_from_tilde(s.omega_tilde),
                    s.vg_over_c * SPEED_OF_LIGHT,
                )
            })
            .collect()
    }
}

/// The lowest `n_bands` bands on `n_k + 1` evenly spaced points of
/// `[0, pi / period]`.
pub fn band_structure(spec: &CrystalSpec, n_bands: usize, n_k: usize) -> Result<Vec<BandSolution>> {
    use rayon::prelude::*;
    let n_k = n_k.max(1);
    let qs: Vec<f64> = (0..=n_k).map(|i| PI * i as f64 / n_k as f64).collect();
    let columns: Vec<Vec<f64>> = qs
        .par_iter()
        .map(|&q| band_frequencies_tilde(spec, q, n_bands, DEFAULT_SCAN_RESOLUTION))
        .collect::<Result<_>>()?;
    (1..=n_bands)
        .map(|band| {
            let samples = qs
                .iter()
                .zip(&columns)
                .map(|(&q, col)| {
                    Ok(BandSample {
                        k_tilde: q,
                        omega_tilde: col[band - 1],
                        vg_over_c: group_velocity_over_c(spec, band, q)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let edges = (
                spec.omega_from_tilde(columns[0][band - 1]),
                spec.omega_from_tilde(columns[n_k][band - 1]),
            );
            Ok(BandSolution {
                band_index: band,
                samples,
                edges,
            })
        })
        .collect()
}

/// Signal tuning needed to reach a target group velocity near the `k = 0`
/// edge of a band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TuningReport {
    pub band_index: usize,
    pub target_vg_over_c: f64,
    /// Smallest `k` (1/m) with `v_g(k)` equal to the target.
    pub k_star: f64,
    /// `period * k_star`.
    pub k_star_tilde: f64,
    /// Band frequency at `k = 0` (rad/s): the signal frequency with `omega_s`
    /// fixed at the band edge.
    pub omega_edge: f64,
    /// Band frequency at `k_star` (rad/s).
    pub omega_at_k_star: f64,
    /// `|omega(k_star) - omega_edge|`, rad/s.
    pub delta_omega: f64,
    /// `delta_omega / (2 pi)`, Hz.
    pub delta_nu: f64,
    /// `omega_edge / (2 pi)`, Hz.
    pub nu_s: f64,
    /// `omega(k_star) / (2 pi)`, Hz.
    pub nu_at_k_star: f64,
    pub delta_nu_over_nu_s: f64,
    /// Largest `v_g / c` in the band and where it occurs (`period * k`).
    pub band_max_vg_over_c: f64,
    pub band_max_k_tilde: f64,
}

/// Finds the smallest `k` on band `band_index` where `v_g = target_vg`
/// (m/s), by bisection on the rising segment that starts at the `k = 0` edge.
pub fn tune_to_group_velocity(
    spec: &CrystalSpec,
    band_index: usize,
    target_vg: f64,
) -> Result<TuningReport> {
    spec.validate()?;
    if !(target_vg.is_finite() && target_vg >= 0.0) {
        return Err(invalid(format!(
            "target group velocity must be >= 0, got {target_vg}"
        )));
    }
    let target = target_vg / SPEED_OF_LIGHT;
    let vg = |q: f64| group_velocity_over_c(spec, band_index, q);
    // coarse scan for the rising segment, then refine its peak
    let grid: Vec<f64> = (0..=64).map(|i| PI * i as f64 / 64.0).collect();
    let mut values = Vec::with_capacity(grid.len());
    for &q in &grid {
        values.push(vg(q)?);
    }
    let first_drop = values
        .windows(2)
        .position(|w| w[1] < w[0])
        .unwrap_or(grid.len() - 1);
    let lo = grid[first_drop.saturating_sub(1)];
    let hi = grid[(first_drop + 1).min(grid.len() - 1)];
    let (q_peak, peak) = golden_section_max(|q| vg(q).unwrap_or(f64::NEG_INFINITY), lo, hi, 1e-10);
    let (q_peak, peak) = if values[first_drop] > peak {
        (grid[first_drop], values[first_drop])
    } else {
        (q_peak, peak)
    };
    if target > peak {
        return Err(Error::UnachievableGroupVelocity {
            band: band_index,
            target,
            max: peak,
        });
    }
    let q_star = if target == values[0] {
        0.0
    } else {
        let mut failure = None;
        let q = bisect(
            |q| match vg(q) {
                Ok(v) => v - target,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            0.0,
            q_peak,
            1e-13,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        q
    };
    let w_edge = band_w(spec, band_index, 0.0)?;
    let w_star = band_w(spec, band_index, q_star)?;
    let omega_edge = spec.omega_from_tilde(w_edge);
    let omega_at_k_star = spec.omega_from_tilde(w_star);
    let delta_omega = (omega_at_k_star - omega_edge).abs();
    let nu_s = omega_edge / (2.0 * PI);
    let delta_nu = delta_omega / (2.0 * PI);
    Ok(TuningReport {
        band_index,
        target_vg_over_c: target,
        k_star: spec.k_from_tilde(q_star),
        k_star_tilde: q_star,
        omega_edge,
        omega_at_k_star,
        delta_omega,
        delta_nu,
        nu_s,
        nu_at_k_star: omega_at_k_star / (2.0 * PI),
        delta_nu_over_nu_s: delta_nu / nu_s,
        band_max_vg_over_c: peak,
        band_max_k_tilde: q_peak,
    })
}
