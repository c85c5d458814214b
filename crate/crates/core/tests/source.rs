use proptest::prelude::*;
use squeezed_pairs::bands::{tune_to_group_velocity, CrystalSpec};
use squeezed_pairs::source::{
    amplitude_for_target_squeeze, flux_to_amplitude, squeeze_parameter, PumpSpec, SPEED_OF_LIGHT,
};

#[test]
fn reference_pump_gives_unit_squeezing() {
    let spec = CrystalSpec::lithium_niobate_stack();
    let vg = 4.59e-3 * SPEED_OF_LIGHT;
    let t = tune_to_group_velocity(&spec, 4, vg).unwrap();
    let a = flux_to_amplitude(&PumpSpec::reference_pump()).unwrap();
    let zeta = squeeze_parameter(t.omega_edge, a, spec.chi2_tilde, vg, spec.l_nl).unwrap();
    assert!((zeta - 1.0).abs() < 0.005, "{zeta}");
    let slope = amplitude_for_target_squeeze(1.0, t.omega_edge, spec.chi2_tilde, vg, spec.l_nl)
        .unwrap()
        / 4.59e-3;
    assert!(((slope - 1.17e8) / 1.17e8).abs() < 0.01, "{slope}");
}

#[test]
fn given_amplitude_must_match_flux() {
    let derived = flux_to_amplitude(&PumpSpec::reference_pump()).unwrap();
    let pump = PumpSpec::new(0.03, 5e-6, 1.0, Some(derived)).unwrap();
    assert_eq!(pump.field_amplitude(), derived);
    let err = PumpSpec::new(0.03, 5e-6, 1.0, Some(2.0 * derived)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

proptest! {
    #[test]
    fn squeezing_scales_linearly(a in 1e3..1e7f64, vg in 1e5..1e8f64, s in 0.1..10.0f64) {
        let (w, chi, l) = (2.0e15, 2.52e-11, 5e-5);
        let z = squeeze_parameter(w, a, chi, vg, l).unwrap();
        let z_a = squeeze_parameter(w, s * a, chi, vg, l).unwrap();
        let z_v = squeeze_parameter(w, a, chi, s * vg, l).unwrap();
        prop_assert!((z_a / z - s).abs() < 1e-12 * s);
        prop_assert!((z / z_v - s).abs() < 1e-12 * s);
        let back = amplitude_for_target_squeeze(z, w, chi, vg, l).unwrap();
        prop_assert!(((back - a) / a).abs() < 1e-12);
    }

    #[test]
    fn amplitude_grows_as_root_flux(w in 1e-6..1.0f64, s in 1.0..100.0f64) {
        let a = flux_to_amplitude(&PumpSpec::new(w, 5e-6, 1.0, None).unwrap()).unwrap();
        let b = flux_to_amplitude(&PumpSpec::new(s * w, 5e-6, 1.0, None).unwrap()).unwrap();
        prop_assert!((b / a - s.sqrt()).abs() < 1e-12 * s);
    }
}
