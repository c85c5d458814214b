use std::f64::consts::PI;

use proptest::prelude::*;
use squeezed_pairs::bands::{
    band_frequencies, band_frequencies_tilde, dispersion_residual_tilde, group_velocity_over_c,
    group_velocity_over_c_fd, tune_to_group_velocity, CrystalSpec, DEFAULT_SCAN_RESOLUTION,
};
use squeezed_pairs::source::SPEED_OF_LIGHT;

fn reference() -> CrystalSpec {
    CrystalSpec::lithium_niobate_stack()
}

#[test]
fn band_four_edge_and_signal_wavelength() {
    let spec = reference();
    let w = band_frequencies_tilde(&spec, 0.0, 8, DEFAULT_SCAN_RESOLUTION).unwrap();
    assert!((w[3] - 1.18).abs() < 0.01, "{}", w[3]);
    let lambda_s = 2.0 * PI * SPEED_OF_LIGHT / spec.omega_from_tilde(w[3]);
    assert!(((lambda_s - 9.27e-7) / 9.27e-7).abs() < 0.01, "{lambda_s}");
    // the pump at twice the signal frequency falls inside band 8
    let zone_edge = band_frequencies_tilde(&spec, PI, 8, DEFAULT_SCAN_RESOLUTION).unwrap();
    let (lo, hi) = (zone_edge[7].min(w[7]), zone_edge[7].max(w[7]));
    assert!(lo < 2.0 * w[3] && 2.0 * w[3] < hi);
}

#[test]
fn vacuum_bands_are_light_lines() {
    let spec = CrystalSpec::new(1e-6, 0.0, 1.0, 1.0, 0.0, 1e-5).unwrap();
    let k = 0.3 * PI / spec.period();
    let omega = band_frequencies(&spec, k, 3).unwrap();
    let ladder = 2.0 * PI * SPEED_OF_LIGHT / spec.period();
    let expect = [
        SPEED_OF_LIGHT * k,
        ladder - SPEED_OF_LIGHT * k,
        ladder + SPEED_OF_LIGHT * k,
    ];
    for (o, e) in omega.iter().zip(expect) {
        assert!(((o - e) / e).abs() < 1e-12, "{o} vs {e}");
    }
    for q in [0.2, 1.0, 2.5] {
        let v = group_velocity_over_c(&spec, 1, q).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }
}

#[test]
fn tuned_wavenumber_reproduces_target() {
    let spec = reference();
    let t = tune_to_group_velocity(&spec, 4, 4.59e-3 * SPEED_OF_LIGHT).unwrap();
    assert!(
        ((t.k_star_tilde - 4.33e-3) / 4.33e-3).abs() < 0.02,
        "{}",
        t.k_star_tilde
    );
    assert!(((t.nu_s - 3.23e14) / 3.23e14).abs() < 0.02);
    let v = group_velocity_over_c(&spec, 4, t.k_star_tilde).unwrap();
    assert!((v - 4.59e-3).abs() < 1e-9);
    // near the edge the band is a parabola: delta omega = v_g k / 2
    let parabola = 0.5 * t.target_vg_over_c * SPEED_OF_LIGHT * t.k_star;
    assert!(((t.delta_omega - parabola) / parabola).abs() < 1e-3);
}

#[test]
fn dense_scan_finds_no_root_in_the_gap() {
    let spec = reference();
    for q in [0.0, PI] {
        let w = band_frequencies_tilde(&spec, q, 5, DEFAULT_SCAN_RESOLUTION).unwrap();
        let (lo, hi) = (w[3].min(w[4]), w[3].max(w[4]));
        // the gap sits between the upper of band 4 and the lower of band 5 at this q
        let n = 20_000;
        let sign0 = dispersion_residual_tilde(&spec, lo + 1e-9, q).signum();
        for i in 1..n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            assert_eq!(
                dispersion_residual_tilde(&spec, x, q).signum(),
                sign0,
                "q={q} w={x}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn roots_satisfy_the_dispersion_relation(q in 0.0..PI) {
        let spec = reference();
        let w = band_frequencies_tilde(&spec, q, 8, DEFAULT_SCAN_RESOLUTION).unwrap();
        for x in &w {
            prop_assert!(dispersion_residual_tilde(&spec, *x, q).abs() < 1e-9);
        }
        for pair in w.windows(2) {
            prop_assert!(pair[1] > pair[0]);
        }
    }

    #[test]
    fn implicit_group_velocity_matches_differences(q in 0.05..(PI - 0.05), band in 1usize..=8) {
        let spec = reference();
        let v = group_velocity_over_c(&spec, band, q).unwrap();
        let fd = group_velocity_over_c_fd(&spec, band, q, 1e-6).unwrap();
        prop_assert!((v - fd).abs() <= 1e-6 * v.max(1e-3), "band {} q {}: {} vs {}", band, q, v, fd);
    }

    #[test]
    fn nearly_uniform_stack_is_nearly_dispersionless(q in 0.01..PI) {
        let eps = 2.0;
        let spec = CrystalSpec::new(5e-7, 5e-7, eps, eps * (1.0 + 1e-6), 0.0, 1e-5).unwrap();
        let w = band_frequencies_tilde(&spec, q, 1, DEFAULT_SCAN_RESOLUTION).unwrap()[0];
        let expect = q / (2.0 * PI * f64::sqrt(eps));
        prop_assert!(((w - expect) / expect).abs() < 1e-5);
    }
}
