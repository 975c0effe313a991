use spinboson_web::{try_bath_profile, try_compare, try_run_dynamics};

#[test]
fn bath_profile_matches_grid() {
    let b = try_bath_profile(0.25, 0.1, 500, 4.0).unwrap();
    assert_eq!(b.frequencies().len(), 500);
    assert_eq!(b.couplings().len(), 500);
    assert_eq!(b.omega().len(), b.density().len());
    assert!((b.frequencies()[499] - 4.0).abs() < 1e-12);
    assert!(b.discrete_reorganization_energy() < b.reorganization_energy());
    assert!((b.recurrence_time() - 2.0 * std::f64::consts::PI * 500.0 / 4.0).abs() < 1e-9);
    assert!(try_bath_profile(-1.0, 0.1, 500, 4.0).is_err());
}

#[test]
fn uncoupled_dynamics_is_rabi() {
    let d = try_run_dynamics(0.25, 0.0, 0.1, false, 300, 320.0).unwrap();
    for (t, p) in d.times().iter().zip(d.p_z()) {
        assert!((p - (0.1 * t).cos()).abs() < 1e-6);
    }
    assert_eq!(d.classification(), "coherent");
    assert!(d.entropy().iter().all(|s| *s == 0.0));
}

#[test]
fn short_windows_stay_unclassified() {
    let d = try_run_dynamics(0.25, 0.1, 0.1, true, 300, 20.0).unwrap();
    assert_eq!(d.classification(), "unclassified");
    assert!(d.steady_p_z().is_finite());
}

#[test]
fn invalid_settings_are_reported() {
    assert!(try_run_dynamics(0.25, 0.1, 0.0, false, 300, 10.0).is_err());
    let err = try_run_dynamics(0.25, 0.1, 0.1, false, 10, 100.0).unwrap_err();
    assert!(err.contains("recurrence"), "{err}");
}

#[test]
fn comparison_diverges_only_with_coupling() {
    let none = try_compare(0.25, 0.0, 0.1, 200, 10.0).unwrap();
    assert_eq!(none.max_abs_difference(), 0.0);
    let some = try_compare(0.25, 0.05, 0.1, 200, 10.0).unwrap();
    assert!(some.max_abs_difference() > 1e-3);
    assert_eq!(some.factorized().times(), some.polarized().times());
}
