//! Random test objects: Haar-like unitaries, Ginibre states, random POVMs and
//! probability vectors. Every generator takes the caller's RNG so sweeps are
//! reproducible from a seed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg;
use crate::observables::{label_bins, BinnedObservable, OutcomeBin, ProbabilityMeasure};
use crate::space::Space;
use crate::state::{DensityOperator, WaveFunction};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal divided out.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::from(1.0) };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    q
}

pub fn random_state<R: Rng + ?Sized>(space: &Space, rng: &mut R) -> WaveFunction {
    let amps = DVector::from_fn(space.dim(), |_, _| gaussian(rng));
    WaveFunction::normalized(space.clone(), amps).expect("nonzero Ginibre vector")
}

/// Density operator `G G† / tr` from a `d × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(space: &Space, rank: usize, rng: &mut R) -> DensityOperator {
    let g = ginibre(space.dim(), rank.max(1), rng);
    let m = &g * g.adjoint();
    DensityOperator::project_to_states(space.clone(), m).expect("positive Ginibre product")
}

/// POVM with `outcomes` effects `S^{-1/2} G_i G_i† S^{-1/2}`, labelled
/// `0, 1, …, outcomes−1`.
pub fn random_povm<R: Rng + ?Sized>(space: &Space, outcomes: usize, rng: &mut R) -> Result<BinnedObservable> {
    let d = space.dim();
    let raw: Vec<DMatrix<C64>> = (0..outcomes)
        .map(|_| {
            let g = ginibre(d, d, rng);
            &g * g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m);
    let s = linalg::pd_inv_sqrt(&total)?;
    let effects = raw.iter().map(|m| linalg::hermitian_part(&(&s * m * &s))).collect();
    let labels: Vec<f64> = (0..outcomes).map(|i| i as f64).collect();
    BinnedObservable::new(space.clone(), label_bins(&labels)?, effects)
}

/// Random probability vector on the given bins (Dirichlet(1) weights).
pub fn random_probability<R: Rng + ?Sized>(bins: Vec<OutcomeBin>, rng: &mut R) -> Result<ProbabilityMeasure> {
    let raw: Vec<f64> = bins.iter().map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    ProbabilityMeasure::normalized(bins, raw)
}
