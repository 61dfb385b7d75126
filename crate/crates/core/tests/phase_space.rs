use std::f64::consts::PI;

use weakmeas::fourier;
use weakmeas::operator::weyl_operator;
use weakmeas::reconstruction::{
    completeness_check, covariant_observable_kernel, husimi, phase_space_reconstruct, InversionOptions, PhaseAxis,
};
use weakmeas::state::gaussian_state;
use weakmeas::{DensityOperator, Error, GridSpec, WaveFunction, C64};

fn coherent_kernel(g: GridSpec) -> WaveFunction {
    covariant_observable_kernel(&gaussian_state(g, 0.5f64.sqrt(), 0.0, 0.0).unwrap(), 1.0).unwrap()
}

fn working_box() -> PhaseAxis {
    PhaseAxis::new(-7.0, 7.0, 64).unwrap()
}

#[test]
fn kernel_of_real_even_probe_is_the_probe() {
    let g = GridSpec::default();
    let probe = gaussian_state(g, 0.8, 0.0, 0.0).unwrap();
    let k = covariant_observable_kernel(&probe, 1.0).unwrap();
    assert!((k.amps() - probe.amps()).camax() < 1e-10);
    assert!((k.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn kernel_variance_scales_with_lambda() {
    let g = GridSpec::default();
    let probe = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
    let variance = |w: &WaveFunction| -> f64 { (0..g.n()).map(|k| g.x(k).powi(2) * w.amps()[k].norm_sqr()).sum::<f64>() * g.dx() };
    let k2 = covariant_observable_kernel(&probe, 2.0).unwrap();
    assert!((variance(&k2) - variance(&probe) / 4.0).abs() < 1e-8);
}

#[test]
fn completeness_scans() {
    let g = GridSpec::default();
    let k = coherent_kernel(g);
    let small = completeness_check(&k, PhaseAxis::new(-4.0, 4.0, 32).unwrap(), PhaseAxis::new(-4.0, 4.0, 32).unwrap()).unwrap();
    let large = completeness_check(&k, working_box(), working_box()).unwrap();
    assert_eq!(large.zero_fraction, 0.0);
    assert!(large.min_overlap < small.min_overlap);

    let left = gaussian_state(g, 0.5f64.sqrt(), -3.0, 0.0).unwrap();
    let right = gaussian_state(g, 0.5f64.sqrt(), 3.0, 0.0).unwrap();
    let cat = WaveFunction::normalized(left.space().clone(), left.amps() + right.amps() * C64::i()).unwrap();
    // the relative phase kills the cross term in |k|², so
    // χ(0, b) ∝ cos 3b vanishes on odd multiples of π/6
    let extent = 1.5 * PI;
    let axis = PhaseAxis::new(-extent, extent, 18).unwrap();
    let rep = completeness_check(&cat, axis, axis).unwrap();
    assert!(rep.zero_fraction > 0.0);
    let h = husimi(&DensityOperator::from_pure(&left), &cat, PhaseAxis::standard(), PhaseAxis::standard()).unwrap();
    let opts = InversionOptions { extent, completeness_samples: 18, ..InversionOptions::default() };
    assert!(matches!(
        phase_space_reconstruct(&h, &cat, opts),
        Err(Error::CompletenessViolation(_))
    ));
}

#[test]
fn husimi_of_the_kernel_peaks_at_the_origin() {
    let g = GridSpec::default();
    let k = coherent_kernel(g);
    let h = husimi(&DensityOperator::from_pure(&k), &k, PhaseAxis::standard(), PhaseAxis::standard()).unwrap();
    let (i0, j0) = (32, 32); // q = p = 0
    assert!((h.at(i0, j0) - 1.0 / (2.0 * PI)).abs() < 1e-10);
    let max = h.values.iter().flatten().fold(0.0f64, |m, v| m.max(*v));
    assert_eq!(max, h.at(i0, j0));
    assert!(h.values.iter().flatten().all(|v| *v >= 0.0));
}

#[test]
fn weyl_covariance() {
    let g = GridSpec::default();
    let k = coherent_kernel(g);
    let rho = DensityOperator::mixture(&[
        (0.3, gaussian_state(g, 0.6, 0.5, 0.0).unwrap()),
        (0.7, gaussian_state(g, 0.9, -1.0, 0.5).unwrap()),
    ])
    .unwrap();
    // q0 = 16·dx = 5 cells, p0 = 2 cells
    let (q0, p0) = (1.25, 0.5);
    let moved = rho.conjugate(&weyl_operator(g, q0, p0).unwrap()).unwrap();
    let axis = PhaseAxis::standard();
    let h = husimi(&rho, &k, axis, axis).unwrap();
    let hm = husimi(&moved, &k, axis, axis).unwrap();
    let mut worst = 0.0f64;
    for i in 0..59 {
        for j in 0..62 {
            worst = worst.max((hm.at(i + 5, j + 2) - h.at(i, j)).abs());
        }
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn position_margin_is_smeared_density() {
    let g = GridSpec::default();
    let k = covariant_observable_kernel(&gaussian_state(g, 0.8, 0.0, 0.0).unwrap(), 1.0).unwrap();
    let phi = gaussian_state(g, 1.2, 0.7, -0.4).unwrap();
    let axis = PhaseAxis::standard();
    let h = husimi(&DensityOperator::from_pure(&phi), &k, axis, axis).unwrap();
    let margin = h.q_marginal();
    let l1: f64 = h
        .qs()
        .iter()
        .zip(&margin)
        .map(|(&q, m)| {
            let shifted = fourier::translate(&g, k.amps(), q);
            let oracle: f64 = (0..g.n()).map(|y| phi.amps()[y].norm_sqr() * shifted[y].norm_sqr()).sum::<f64>() * g.dx();
            (m - oracle).abs()
        })
        .sum::<f64>()
        * axis.step();
    assert!(l1 < 2e-3, "{l1}");
}

#[test]
fn distinct_states_have_distinct_distributions() {
    let g = GridSpec::default();
    let k = coherent_kernel(g);
    let superpose = |c: [C64; 3]| {
        let parts = [(-1.0, 0.0), (0.5, 0.5), (1.0, -0.5)];
        let mut amps = weakmeas::DVector::zeros(g.n());
        for (w, (x0, p0)) in c.iter().zip(parts) {
            amps += gaussian_state(g, 0.7, x0, p0).unwrap().amps() * *w;
        }
        WaveFunction::normalized(weakmeas::Space::Grid(g), amps).unwrap()
    };
    let a = superpose([C64::new(1.0, 0.0), C64::new(0.3, 0.2), C64::new(-0.4, 0.1)]);
    let b = superpose([C64::new(1.0, 0.0), C64::new(0.3, -0.2), C64::new(-0.4, 0.1)]);
    let axis = PhaseAxis::standard();
    let ha = husimi(&DensityOperator::from_pure(&a), &k, axis, axis).unwrap();
    let hb = husimi(&DensityOperator::from_pure(&b), &k, axis, axis).unwrap();
    assert!(ha.l1_distance(&hb).unwrap() > 1e-6);
}

#[test]
fn reconstruction_is_idempotent() {
    let g = GridSpec::default();
    let k = coherent_kernel(g);
    let axis = PhaseAxis::standard();
    let rho = DensityOperator::from_pure(&gaussian_state(g, 0.5f64.sqrt(), -0.5, 1.0).unwrap());
    let once = phase_space_reconstruct(&husimi(&rho, &k, axis, axis).unwrap(), &k, InversionOptions::default()).unwrap();
    // the sub-1e-6 eigencomponents left by the first pass live outside the box
    // and get amplified by the division, so feed back the dominant part only
    let kept = DensityOperator::mixture(&once.state.components(1e-3)).unwrap();
    let twice = phase_space_reconstruct(&husimi(&kept, &k, axis, axis).unwrap(), &k, InversionOptions::default()).unwrap();
    let d = kept.trace_distance(&twice.state).unwrap();
    assert!(d < 1e-4, "{d}");
    assert!(once.projection_distance < 1e-3);
}

#[test]
fn squeezed_state_is_flagged_ill_posed() {
    let g = GridSpec::default();
    let k = coherent_kernel(g);
    let axis = PhaseAxis::standard();
    let rho = DensityOperator::from_pure(&gaussian_state(g, 0.3, 0.0, 0.0).unwrap());
    let rep = phase_space_reconstruct(&husimi(&rho, &k, axis, axis).unwrap(), &k, InversionOptions::default()).unwrap();
    assert!(rep.ill_posed, "coverage {}", rep.coverage);
}

#[test]
fn mass_outside_the_box_is_an_error() {
    let g = GridSpec::default();
    let k = coherent_kernel(g);
    let rho = DensityOperator::from_pure(&gaussian_state(g, 0.5f64.sqrt(), 8.0, 0.0).unwrap());
    let axis = PhaseAxis::standard();
    assert!(matches!(husimi(&rho, &k, axis, axis), Err(Error::NormalizationDeficit(_))));
}
