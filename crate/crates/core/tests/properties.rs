use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use weakmeas::fourier;
use weakmeas::observables::{convolve, first_moment, label_bins, naimark_dilate, statistics};
use weakmeas::random::{random_density, random_povm, random_probability, random_state};
use weakmeas::{GridSpec, Operator, Space, C64};

fn max_dev(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_povms_are_effects(seed in any::<u64>(), d in 2usize..6, m in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_povm(&Space::finite(d), m, &mut rng).unwrap();
        let total = e.effects().iter().fold(DMatrix::zeros(d, d), |acc, f| acc + f.matrix());
        prop_assert!(max_dev(&total, &DMatrix::identity(d, d)) < 1e-9);
        for f in e.effects() {
            prop_assert!(f.eigenvalues().iter().all(|v| *v > -1e-10 && *v < 1.0 + 1e-10));
        }
        let rho = random_density(&Space::finite(d), 2, &mut rng);
        let p = statistics(&e, &rho).unwrap();
        prop_assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn smearing_shifts_first_moments(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_povm(&Space::finite(d), 3, &mut rng).unwrap();
        let mu = random_probability(label_bins(&[-2.0, -1.0, 0.0, 1.0]).unwrap(), &mut rng).unwrap();
        let smeared = convolve(&mu, &e).unwrap();
        let rhs = first_moment(&e).matrix() + DMatrix::identity(d, d) * C64::from(mu.mean());
        prop_assert!(max_dev(first_moment(&smeared).matrix(), &rhs) < 1e-9);
        let total = smeared.effects().iter().fold(DMatrix::zeros(d, d), |acc, f| acc + f.matrix());
        prop_assert!(max_dev(&total, &DMatrix::identity(d, d)) < 1e-9);
    }

    #[test]
    fn dilations_reproduce_effects(seed in any::<u64>(), d in 2usize..4, m in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_povm(&Space::finite(d), m, &mut rng).unwrap();
        let nd = naimark_dilate(&e).unwrap();
        let (iso, eff) = nd.verify(&e);
        prop_assert!(iso < 1e-10 && eff < 1e-10);
    }

    #[test]
    fn fourier_is_unitary(seed in any::<u64>(), log2 in 4u32..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = GridSpec::new(1 << log2, 10.0).unwrap();
        let psi = random_state(&Space::Grid(g), &mut rng);
        let f = fourier::forward(&g, psi.amps());
        prop_assert!((f.norm() - psi.amps().norm()).abs() < 1e-10);
        prop_assert!((fourier::inverse(&g, &f) - psi.amps()).camax() < 1e-12);
    }

    #[test]
    fn projectors_are_idempotent(seed in any::<u64>(), d in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(&Space::finite(d), &mut rng);
        let p = Operator::projector(&psi);
        prop_assert!(p.is_projection(1e-10));
        prop_assert!(p.compose(&p).unwrap().distance(&p) < 1e-10);
    }
}
