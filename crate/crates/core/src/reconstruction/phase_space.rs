//! Covariant phase-space observables and state reconstruction from their
//! statistics.
//!
//! With a kernel state `k`, the density
//!
//! ```text
//! H(q, p) = (1/2π) ⟨W_qp k| ρ |W_qp k⟩
//! ```
//!
//! has the Fourier transform `G(a, b) = ∫ H e^{-i(qb - pa)} = χ_K(a, b) χ_ρ(-a, -b)`
//! where `χ_X(a, b) = tr[X W_ab]`. Dividing by the kernel's characteristic
//! function and inverting the Weyl transform line by line recovers ρ.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::GridSpec;
use crate::operator::check_weyl_range;
use crate::space::Space;
use crate::state::{DensityOperator, WaveFunction};

/// Mass defect of a resampled kernel above which it counts as aliased.
pub const ALIASING_TOL: f64 = 1e-9;
/// Husimi mass deficit that aborts the computation.
pub const NORMALIZATION_LIMIT: f64 = 1e-2;
/// Characteristic-function magnitude treated as zero.
pub const ZERO_OVERLAP: f64 = 1e-12;

/// Half-open sample axis `lo + i·(hi − lo)/count`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseAxis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl PhaseAxis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo < hi) || count == 0 {
            return Err(Error::InvalidParameter { name: "axis", reason: format!("[{lo}, {hi}) with {count} samples") });
        }
        Ok(Self { lo, hi, count })
    }

    /// 64 samples on `[−8, 8)`.
    pub fn standard() -> Self {
        Self { lo: -8.0, hi: 8.0, count: 64 }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.lo + i as f64 * self.step()).collect()
    }
}

/// Resampled kernel `k(x) = √λ · conj(φ(−λx))` on the probe's grid.
///
/// The scaling makes `W_qp k` the state whose Husimi statistics reproduce the
/// pointer readout of a position-momentum measurement at coupling λ.
pub fn covariant_observable_kernel(probe: &WaveFunction, lambda: f64) -> Result<WaveFunction> {
    crate::observables::check_lambda(lambda)?;
    let grid = *probe.space().require_grid()?;
    let mut probe = probe.clone();
    probe.normalize()?;
    let coeffs = fourier::forward(&grid, probe.amps());
    let half = 0.5 * grid.length();
    let amps = DVector::from_fn(grid.n(), |k, _| {
        let y = -lambda * grid.x(k);
        if y.abs() >= half {
            C64::from(0.0)
        } else {
            fourier::interpolate_from_coeffs(&grid, &coeffs, y).conj() * lambda.sqrt()
        }
    });
    let mass = amps.norm_squared() * grid.dx();
    if (mass - 1.0).abs() > ALIASING_TOL {
        return Err(Error::Aliasing((mass - 1.0).abs()));
    }
    WaveFunction::normalized(Space::Grid(grid), amps)
}

/// Samples of a phase-space density on a rectangular box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceDistribution {
    pub q_axis: PhaseAxis,
    pub p_axis: PhaseAxis,
    /// Row `i` is `q_i`, column `j` is `p_j`.
    pub values: Vec<Vec<f64>>,
}

impl PhaseSpaceDistribution {
    pub fn qs(&self) -> Vec<f64> {
        self.q_axis.points()
    }

    pub fn ps(&self) -> Vec<f64> {
        self.p_axis.points()
    }

    pub fn cell(&self) -> f64 {
        self.q_axis.step() * self.p_axis.step()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Riemann sum over the box.
    pub fn total(&self) -> f64 {
        self.values.iter().flatten().sum::<f64>() * self.cell()
    }

    /// Position marginal `∫ H dp` at each `q_i`.
    pub fn q_marginal(&self) -> Vec<f64> {
        self.values.iter().map(|row| row.iter().sum::<f64>() * self.p_axis.step()).collect()
    }

    pub fn p_marginal(&self) -> Vec<f64> {
        (0..self.p_axis.count)
            .map(|j| self.values.iter().map(|row| row[j]).sum::<f64>() * self.q_axis.step())
            .collect()
    }

    /// `∫ |H − H'|` over a common box.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        if self.q_axis != other.q_axis || self.p_axis != other.p_axis {
            return Err(Error::SpaceMismatch("phase-space boxes differ".into()));
        }
        let s: f64 = self
            .values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(s * self.cell())
    }
}

/// `⟨v|W_qp k⟩` for every `(q_i, p_j)` and every column `v` of `vs`;
/// returns one `nq × np` matrix per column.
fn weyl_overlaps(grid: &GridSpec, vs: &DMatrix<C64>, kernel: &DVector<C64>, qs: &[f64], ps: &[f64]) -> Result<Vec<DMatrix<C64>>> {
    for &q in qs {
        check_weyl_range(grid, q, 0.0)?;
    }
    for &p in ps {
        check_weyl_range(grid, 0.0, p)?;
    }
    let n = grid.n();
    let dx = grid.dx();
    // E[j, y] = e^{i p_j y}
    let phases = DMatrix::from_fn(ps.len(), n, |j, y| C64::from_polar(1.0, ps[j] * grid.x(y)));
    let mut out = vec![DMatrix::zeros(qs.len(), ps.len()); vs.ncols()];
    for (i, &q) in qs.iter().enumerate() {
        let shifted = fourier::translate(grid, kernel, q);
        // g[y, r] = conj(v_r(y)) k(y − q)
        let g = DMatrix::from_fn(n, vs.ncols(), |y, r| vs[(y, r)].conj() * shifted[y]);
        let sums = &phases * g;
        for (r, m) in out.iter_mut().enumerate() {
            for (j, &p) in ps.iter().enumerate() {
                m[(i, j)] = sums[(j, r)] * C64::from_polar(dx, -0.5 * q * p);
            }
        }
    }
    Ok(out)
}

/// Husimi-type density of `rho` for the covariant observable generated by
/// `kernel`, sampled on the given box.
pub fn husimi(rho: &DensityOperator, kernel: &WaveFunction, q_axis: PhaseAxis, p_axis: PhaseAxis) -> Result<PhaseSpaceDistribution> {
    rho.space().ensure_same(kernel.space())?;
    let grid = *kernel.space().require_grid()?;
    let components = rho.components(1e-14);
    let vs = DMatrix::from_fn(grid.n(), components.len(), |y, r| components[r].1.amps()[y]);
    let overlaps = weyl_overlaps(&grid, &vs, kernel.amps(), &q_axis.points(), &p_axis.points())?;
    let values = (0..q_axis.count)
        .map(|i| {
            (0..p_axis.count)
                .map(|j| {
                    components.iter().zip(&overlaps).map(|((w, _), m)| w * m[(i, j)].norm_sqr()).sum::<f64>() / (2.0 * PI)
                })
                .collect()
        })
        .collect();
    let h = PhaseSpaceDistribution { q_axis, p_axis, values };
    let deficit = 1.0 - h.total();
    if deficit > NORMALIZATION_LIMIT {
        return Err(Error::NormalizationDeficit(deficit));
    }
    if deficit.abs() > 1e-3 {
        log::warn!("phase-space box misses {deficit:.3e} of the mass");
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub min_overlap: f64,
    /// Fraction of sample points with `|⟨k|W_qp k⟩| < 1e-12`.
    pub zero_fraction: f64,
    pub samples: usize,
}

/// Scan `|⟨k|W_ab k⟩|` over the box for zeros.
pub fn completeness_check(kernel: &WaveFunction, a_axis: PhaseAxis, b_axis: PhaseAxis) -> Result<CompletenessReport> {
    let grid = *kernel.space().require_grid()?;
    let vs = DMatrix::from_column_slice(grid.n(), 1, kernel.amps().as_slice());
    let m = weyl_overlaps(&grid, &vs, kernel.amps(), &a_axis.points(), &b_axis.points())?.remove(0);
    let samples = m.len();
    let zeros = m.iter().filter(|z| z.norm() < ZERO_OVERLAP).count();
    let min_overlap = m.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    Ok(CompletenessReport { min_overlap, zero_fraction: zeros as f64 / samples as f64, samples })
}

/// Regularization of the Fourier division.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionOptions {
    /// Characteristic-plane working box `[−extent, extent]²`.
    pub extent: f64,
    /// Cells with `|χ_K| ≤ tau` are dropped.
    pub tau: f64,
    /// Samples per axis for the completeness scan.
    pub completeness_samples: usize,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self { extent: 7.0, tau: 1e-6, completeness_samples: 64 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseSpaceReport {
    pub state: DensityOperator,
    /// Trace distance moved by the projection onto states.
    pub projection_distance: f64,
    /// Share of retained characteristic energy away from the cutoff rim.
    pub coverage: f64,
    pub ill_posed: bool,
    pub completeness: CompletenessReport,
}

/// Invert `H ↦ ρ` by Fourier division on the working box, then project onto
/// the state space. The system grid is the kernel's grid.
pub fn phase_space_reconstruct(h: &PhaseSpaceDistribution, kernel: &WaveFunction, opts: InversionOptions) -> Result<PhaseSpaceReport> {
    let grid = *kernel.space().require_grid()?;
    let n = grid.n();
    let (dx, dp) = (grid.dx(), grid.dp());
    let extent = opts.extent;
    check_weyl_range(&grid, extent, extent)?;

    let axis = PhaseAxis::new(-extent, extent, opts.completeness_samples.max(2))?;
    let completeness = completeness_check(kernel, axis, axis)?;
    if completeness.zero_fraction > 0.0 {
        return Err(Error::CompletenessViolation(completeness.zero_fraction));
    }

    // a = m·dx so the ρ lines fall on grid pairs; b on the momentum grid.
    let m_max = (extent / dx).floor() as isize;
    let shifts: Vec<isize> = (-m_max..=m_max).collect();
    let bs: Vec<f64> = grid.momenta().into_iter().filter(|b| b.abs() <= extent).collect();

    let qs = h.qs();
    let ps = h.ps();
    let (dq, dpp) = (h.q_axis.step(), h.p_axis.step());
    let hmat = DMatrix::from_fn(qs.len(), ps.len(), |i, j| C64::from(h.at(i, j)));
    let k = kernel.amps();

    // G(−a, −b) = Σ H e^{i(qb − pa)} dq dp
    let pa = DMatrix::from_fn(ps.len(), shifts.len(), |j, s| C64::from_polar(dpp, -ps[j] * shifts[s] as f64 * dx));
    let qb = DMatrix::from_fn(bs.len(), qs.len(), |t, i| C64::from_polar(dq, qs[i] * bs[t]));
    let g = qb * (&hmat * pa); // bs × shifts

    let mut chi = DMatrix::<C64>::zeros(bs.len(), shifts.len());
    let (mut energy, mut rim) = (0.0, 0.0);
    for (s, &m) in shifts.iter().enumerate() {
        let a = m as f64 * dx;
        for (t, &b) in bs.iter().enumerate() {
            // χ_K(−a, −b) = e^{−iab/2} Σ conj k(y) e^{−iby} k(y + a) dx
            let ck: C64 = (0..n)
                .filter_map(|y| {
                    let z = y as isize + m;
                    (0..n as isize).contains(&z).then(|| k[y].conj() * k[z as usize] * C64::from_polar(1.0, -b * grid.x(y)))
                })
                .sum::<C64>()
                * C64::from_polar(dx, -0.5 * a * b);
            if ck.norm() > opts.tau {
                let v = g[(t, s)] / ck;
                chi[(t, s)] = v;
                energy += v.norm_sqr();
                if ck.norm() < 100.0 * opts.tau {
                    rim += v.norm_sqr();
                }
            }
        }
    }
    let coverage = if energy > 0.0 { 1.0 - rim / energy } else { 0.0 };
    let ill_posed = coverage < 0.99;
    if ill_posed {
        log::warn!("division mask covers only {coverage:.4} of the characteristic energy");
    }

    // ρ(c − a/2, c + a/2) = (1/2π) Σ_b χ(a, b) e^{−ibc} dp
    let mut rho = DMatrix::<C64>::zeros(n, n);
    for (s, &m) in shifts.iter().enumerate() {
        for j in 0..n {
            let kk = j as isize + m;
            if !(0..n as isize).contains(&kk) {
                continue;
            }
            let kk = kk as usize;
            let c = 0.5 * (grid.x(j) + grid.x(kk));
            let v: C64 = bs.iter().enumerate().map(|(t, &b)| chi[(t, s)] * C64::from_polar(1.0, -b * c)).sum();
            rho[(j, kk)] = v * (dp / (2.0 * PI));
        }
    }
    let space = Space::Grid(grid);
    let raw = crate::linalg::hermitian_part(&rho);
    let state = DensityOperator::project_to_states(space.clone(), raw.clone())?;
    let diff = (&raw - state.matrix()).scale(dx);
    let projection_distance = 0.5 * crate::linalg::herm_eigenvalues(&diff).iter().map(|v| v.abs()).sum::<f64>();
    Ok(PhaseSpaceReport { state, projection_distance, coverage, ill_posed, completeness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::gaussian_state;

    fn setup() -> (GridSpec, WaveFunction) {
        let g = GridSpec::default();
        let k = covariant_observable_kernel(&gaussian_state(g, 0.5f64.sqrt(), 0.0, 0.0).unwrap(), 1.0).unwrap();
        (g, k)
    }

    #[test]
    fn kernel_scaling_and_aliasing() {
        let g = GridSpec::default();
        let probe = gaussian_state(g, 1.0, 0.5, 0.3).unwrap();
        let k = covariant_observable_kernel(&probe, 2.0).unwrap();
        let oracle = WaveFunction::from_fn(g, |x| {
            let y = -2.0 * x;
            C64::from_polar((2.0f64).sqrt() * (-(y - 0.5f64).powi(2) / 4.0).exp() / (2.0 * PI).powf(0.25), -0.3 * y)
        })
        .unwrap();
        assert!((k.amps() - oracle.amps()).camax() < 1e-8);
        let wide = gaussian_state(g, 3.5, 0.0, 0.0).unwrap();
        assert!(matches!(covariant_observable_kernel(&wide, 0.2), Err(Error::Aliasing(_))));
    }

    #[test]
    fn coherent_husimi_is_gaussian() {
        let (g, k) = setup();
        let phi = gaussian_state(g, 0.5f64.sqrt(), 1.0, -0.5).unwrap();
        let h = husimi(&DensityOperator::from_pure(&phi), &k, PhaseAxis::standard(), PhaseAxis::standard()).unwrap();
        assert!((h.total() - 1.0).abs() < 1e-3);
        // |⟨k_qp|φ⟩|² = exp(−((q−1)² + (p+0.5)²)/2)
        for (i, q) in h.qs().iter().enumerate().step_by(7) {
            for (j, p) in h.ps().iter().enumerate().step_by(5) {
                let expect = (-((q - 1.0).powi(2) + (p + 0.5).powi(2)) / 2.0).exp() / (2.0 * PI);
                assert!((h.at(i, j) - expect).abs() < 1e-9, "{q} {p}");
            }
        }
    }

    #[test]
    fn completeness_of_gaussian_kernel() {
        let (_, k) = setup();
        let box7 = PhaseAxis::new(-7.0, 7.0, 64).unwrap();
        let rep = completeness_check(&k, box7, box7).unwrap();
        assert_eq!(rep.zero_fraction, 0.0);
        let rep = completeness_check(&k, PhaseAxis::standard(), PhaseAxis::standard()).unwrap();
        assert!(rep.zero_fraction > 0.0);
    }

    #[test]
    fn coherent_round_trip() {
        let (g, k) = setup();
        let phi = gaussian_state(g, 0.5f64.sqrt(), 0.5, 0.25).unwrap();
        let rho = DensityOperator::from_pure(&phi);
        let h = husimi(&rho, &k, PhaseAxis::standard(), PhaseAxis::standard()).unwrap();
        let rep = phase_space_reconstruct(&h, &k, InversionOptions::default()).unwrap();
        let d = rep.state.trace_distance(&rho).unwrap();
        assert!(d < 1e-3, "trace distance {d}");
        assert!(!rep.ill_posed);
    }
}
