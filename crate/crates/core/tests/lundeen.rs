use weakmeas::reconstruction::{lundeen_reconstruct, LundeenConfig};
use weakmeas::state::gaussian_state;
use weakmeas::{GridSpec, WaveFunction, C64};

#[test]
fn bump_function_converges_as_bins_shrink() {
    let g = GridSpec::default();
    let bump = WaveFunction::from_fn(g, |x| {
        let u = x / 3.0;
        C64::from(if u.abs() < 1.0 { (-1.0 / (1.0 - u * u)).exp() } else { 0.0 })
    })
    .unwrap();
    let base = LundeenConfig::default_for(g);
    let fids: Vec<f64> = [(32, 0.1), (64, 0.05), (128, 0.025)]
        .iter()
        .map(|&(bins, alpha)| lundeen_reconstruct(&bump, &LundeenConfig { bins, alpha, ..base }).unwrap().fidelity_vs_truth.unwrap())
        .collect();
    assert!(fids.windows(2).all(|w| w[1] > w[0]), "{fids:?}");
    assert!(fids[2] > 0.99, "{fids:?}");
}

#[test]
fn displaced_momentum_fails_with_zero_fidelity() {
    let g = GridSpec::default();
    let phi = gaussian_state(g, 1.0, 0.0, 5.0).unwrap();
    let rep = lundeen_reconstruct(&phi, &LundeenConfig::default_for(g)).unwrap();
    assert!(rep.diagnostics.postselection_failed);
    assert!(rep.estimate.is_none());
    assert_eq!(rep.fidelity_vs_truth, Some(0.0));
    assert!(rep.ensure_postselected().is_err());
    assert_eq!(rep.points.len(), 64);
}

#[test]
fn window_warning_when_state_leaks() {
    let g = GridSpec::default();
    let phi = gaussian_state(g, 1.0, 7.0, 0.0).unwrap();
    let rep = lundeen_reconstruct(&phi, &LundeenConfig::default_for(g)).unwrap();
    assert!(rep.diagnostics.window_warning);
    let centred = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
    assert!(!lundeen_reconstruct(&centred, &LundeenConfig::default_for(g)).unwrap().diagnostics.window_warning);
}

#[test]
fn complex_state_keeps_its_phase_profile() {
    let g = GridSpec::default();
    let phi = gaussian_state(g, 1.0, 0.5, 0.05).unwrap();
    let rep = lundeen_reconstruct(&phi, &LundeenConfig::default_for(g)).unwrap();
    assert!(rep.fidelity_vs_truth.unwrap() > 0.99);
    let report_json = serde_json::to_string(&rep).unwrap();
    assert!(report_json.contains("raw_points"));
}
