use weakmeas::observables::{label_bins, sharp_observable};
use weakmeas::operator::qubit_ops;
use weakmeas::state::gaussian_state;
use weakmeas::weak_values::{
    conditional_series, zero_coupling_limit, extrapolate_weak_limit, probe_moments, weak_value, Measured, SchemeKind, WeakValueQuery,
    DEFAULT_LADDER,
};
use weakmeas::{GridSpec, WaveFunction, C64};

fn query(phi: WaveFunction) -> WeakValueQuery {
    let ops = qubit_ops();
    let plus = sharp_observable(&ops.sigma_x, label_bins(&[-1.0, 1.0]).unwrap()).unwrap();
    WeakValueQuery::new(Measured::Sharp(ops.sigma_z), plus, vec![1], phi).unwrap()
}

/// With a chirped probe `⟨{Q, P}⟩ = s ≠ 0` and the zero-coupling limit picks
/// up the imaginary part: `(Re z + s Im z)/⟨φ|Fφ⟩` with `z` the numerator.
#[test]
fn chirped_probe_mixes_in_the_imaginary_part() {
    let g = GridSpec::new(256, 32.0).unwrap();
    let (delta, kappa) = (0.5f64.sqrt(), 0.2);
    let base = gaussian_state(g, delta, 0.0, 0.0).unwrap();
    let probe = WaveFunction::from_fn(g, |x| {
        let k = g.nearest_index(x).unwrap();
        base.amps()[k] * C64::from_polar(1.0, kappa * x * x)
    })
    .unwrap();
    let s = 4.0 * kappa * delta * delta;
    assert!((probe_moments(&probe).unwrap().anticommutator() - s).abs() < 1e-8);

    let q = query(WaveFunction::qubit(C64::new(0.9, 0.0), C64::new(0.3, 0.3)).unwrap());
    let z = q.numerator();
    let closed = (z.re + s * z.im) / q.postselection_mass();
    let limit = zero_coupling_limit(&q, &probe).unwrap();
    assert!(limit.im.abs() < 1e-12);
    assert!((limit.re - closed).abs() < 1e-8);

    let w = weak_value(&q).unwrap();
    assert!((closed - w.re).abs() > 0.05, "the chirp must shift the limit");
    let series = conditional_series(SchemeKind::Position, &q, &probe, &DEFAULT_LADDER).unwrap();
    let (extrapolated, _) = extrapolate_weak_limit(&series).unwrap();
    assert!((extrapolated - closed).abs() < 1e-3, "{extrapolated} vs {closed}");
}

#[test]
fn unchirped_limit_is_the_real_part() {
    let g = GridSpec::new(256, 32.0).unwrap();
    let probe = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
    let q = query(WaveFunction::qubit(C64::new(0.7, 0.1), C64::new(-0.2, 0.5)).unwrap());
    let limit = zero_coupling_limit(&q, &probe).unwrap();
    assert!((limit.re - weak_value(&q).unwrap().re).abs() < 1e-8);
}
