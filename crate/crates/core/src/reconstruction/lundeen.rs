//! Pointwise wavefunction reconstruction by weak measurement of interval
//! projections with a spin probe and postselection on momentum near zero.
//!
//! For each interval `I_i` the coupling `e^{-iα Q_i⊗σ_y}` takes `φ⊗|0⟩` to
//!
//! ```text
//! Ψ = Q_iφ ⊗ (cos α|0⟩ + sin α|1⟩) + (I − Q_i)φ ⊗ |0⟩.
//! ```
//!
//! Conditioning on momentum in `J_ε = (−ε/2, ε/2)` and scaling the spin
//! averages by `1/(2 sin α)` gives, as α→0, the matrix element
//! `⟨φ|P^P(J_ε) Q_i φ⟩` up to the postselection normalization.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::GridSpec;
use crate::observables::{label_bins, uniform_bins, OutcomeBin, ProbabilityMeasure};
use crate::space::Space;
use crate::state::WaveFunction;
use crate::weak_values::POSTSELECTION_THRESHOLD;

/// Interval partition, coupling angle and momentum window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LundeenConfig {
    pub grid: GridSpec,
    /// Window `[lo, hi)` partitioned into `bins` equal intervals.
    pub window: [f64; 2],
    pub bins: usize,
    pub alpha: f64,
    pub epsilon: f64,
}

impl LundeenConfig {
    /// 64 intervals on `[−8, 8)`, α = 0.05, ε = 4·dp.
    pub fn default_for(grid: GridSpec) -> Self {
        Self { grid, window: [-8.0, 8.0], bins: 64, alpha: 0.05, epsilon: 4.0 * grid.dp() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= FRAC_PI_4) {
            return Err(Error::InvalidParameter { name: "alpha", reason: format!("{} not in (0, π/4]", self.alpha) });
        }
        if !(self.epsilon >= self.grid.dp() * (1.0 - 1e-12)) {
            return Err(Error::InvalidParameter { name: "epsilon", reason: format!("{} below dp = {}", self.epsilon, self.grid.dp()) });
        }
        if self.bins == 0 {
            return Err(Error::InvalidParameter { name: "bins", reason: "need at least one interval".into() });
        }
        let half = 0.5 * self.grid.length();
        let [lo, hi] = self.window;
        if !(lo < hi) || lo < -half || hi > half {
            return Err(Error::InvalidParameter { name: "window", reason: format!("[{lo}, {hi}) not inside the grid") });
        }
        for b in self.intervals()? {
            if !self.grid.points().iter().any(|&x| b.contains(x)) {
                return Err(Error::EmptyInterval { lo: b.lo(), hi: b.hi() });
            }
        }
        Ok(())
    }

    pub fn intervals(&self) -> Result<Vec<OutcomeBin>> {
        uniform_bins(self.window[0], self.window[1], self.bins)
    }

    /// `2 sin α`.
    pub fn scale(&self) -> f64 {
        2.0 * self.alpha.sin()
    }
}

/// Spin component read after postselection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    X,
    Y,
}

/// The coupled grid ⊗ spin state, built from the two projection branches.
pub fn lundeen_couple(phi: &WaveFunction, interval: OutcomeBin, alpha: f64) -> Result<WaveFunction> {
    let grid = *phi.space().require_grid()?;
    let (c, s) = (alpha.cos(), alpha.sin());
    let mut amps = DVector::zeros(2 * grid.n());
    for k in 0..grid.n() {
        let a = phi.amps()[k];
        if interval.contains(grid.x(k)) {
            amps[2 * k] = a * c;
            amps[2 * k + 1] = a * s;
        } else {
            amps[2 * k] = a;
        }
    }
    WaveFunction::new(Space::hybrid(grid), amps)
}

/// Postselected spin branches `χ_s = P^P(J_ε) ψ_s`.
fn postselect(psi: &WaveFunction, eps: f64) -> Result<(GridSpec, DVector<C64>, DVector<C64>)> {
    let factors = psi.space().factors();
    let grid = match factors.as_slice() {
        [Space::Grid(g), Space::Qubit] => *g,
        _ => return Err(Error::SpaceMismatch(format!("expected grid ⊗ qubit, found {}", psi.space().label()))),
    };
    let n = grid.n();
    let branch = |s: usize| DVector::from_fn(n, |k, _| psi.amps()[2 * k + s]);
    let chi0 = fourier::momentum_window(&grid, &branch(0), -0.5 * eps, 0.5 * eps);
    let chi1 = fourier::momentum_window(&grid, &branch(1), -0.5 * eps, 0.5 * eps);
    Ok((grid, chi0, chi1))
}

/// Postselection mass and the joint values `⟨Ψ|P^P(J_ε)⊗σ_j|Ψ⟩` for j = x, y.
fn joint_spin(psi: &WaveFunction, eps: f64) -> Result<(f64, f64, f64)> {
    let (grid, chi0, chi1) = postselect(psi, eps)?;
    let dx = grid.dx();
    let mass = (chi0.norm_squared() + chi1.norm_squared()) * dx;
    // ρ_01 = ⟨χ_1|χ_0⟩
    let rho01 = chi1.dotc(&chi0) * dx;
    Ok((mass, 2.0 * rho01.re, -2.0 * rho01.im))
}

/// Conditional distribution of the spin component over `{−1, +1}` given
/// momentum in `J_ε`.
pub fn lundeen_conditionals(psi: &WaveFunction, eps: f64, pauli: Pauli) -> Result<ProbabilityMeasure> {
    let (mass, sx, sy) = joint_spin(psi, eps)?;
    if mass <= POSTSELECTION_THRESHOLD {
        return Err(Error::PostselectionImpossible { mass });
    }
    let mean = match pauli {
        Pauli::X => sx,
        Pauli::Y => sy,
    } / mass;
    let plus = (0.5 * (1.0 + mean)).clamp(0.0, 1.0);
    ProbabilityMeasure::new(label_bins(&[-1.0, 1.0])?, vec![1.0 - plus, plus])
}

/// One interval's measurement record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LundeenPoint {
    /// Postselection mass `⟨Ψ|P^P(J_ε)⊗I|Ψ⟩`.
    pub mass: f64,
    /// `(⟨σ_x⟩ + i⟨σ_y⟩)/(2 sin α)` from the conditional averages.
    pub value: Option<C64>,
    /// The same without conditioning: joint values over `2 sin α`.
    pub raw: C64,
    /// Joint values at α and α/2 combined to cancel the `(1 − cos α)` term;
    /// this is the zero-coupling limit of `raw`.
    pub weak_limit: C64,
}

/// Scaled joint values: `⟨φ|P^P(J_ε)Q_iφ⟩ − (1 − cos α)‖P^P(J_ε)Q_iφ‖²` exactly.
fn scaled_joint(phi: &WaveFunction, interval: OutcomeBin, alpha: f64, eps: f64) -> Result<(WaveFunction, f64, C64)> {
    let psi = lundeen_couple(phi, interval, alpha)?;
    let (mass, sx, sy) = joint_spin(&psi, eps)?;
    Ok((psi, mass, C64::new(sx, sy) / (2.0 * alpha.sin())))
}

pub fn lundeen_point_detail(phi: &WaveFunction, interval: OutcomeBin, alpha: f64, eps: f64) -> Result<LundeenPoint> {
    let (psi, mass, raw) = scaled_joint(phi, interval, alpha, eps)?;
    let (_, _, half) = scaled_joint(phi, interval, 0.5 * alpha, eps)?;
    let (c1, c2) = (1.0 - alpha.cos(), 1.0 - (0.5 * alpha).cos());
    let weak_limit = (half * c1 - raw * c2) / (c1 - c2);
    let (sx, sy) = (2.0 * alpha.sin() * raw.re, 2.0 * alpha.sin() * raw.im);
    let scale = 2.0 * alpha.sin();
    let value = (mass > POSTSELECTION_THRESHOLD).then(|| {
        let px = lundeen_conditionals(&psi, eps, Pauli::X).map(|m| m.mean()).unwrap_or(sx / mass);
        let py = lundeen_conditionals(&psi, eps, Pauli::Y).map(|m| m.mean()).unwrap_or(sy / mass);
        C64::new(px, py) / scale
    });
    Ok(LundeenPoint { mass, value, raw, weak_limit })
}

/// The finite-α point estimate `(⟨σ_x⟩ + i⟨σ_y⟩)/(2 sin α)` conditioned on
/// the momentum window.
pub fn lundeen_point(phi: &WaveFunction, interval: OutcomeBin, alpha: f64, eps: f64) -> Result<C64> {
    let p = lundeen_point_detail(phi, interval, alpha, eps)?;
    p.value.ok_or(Error::PostselectionImpossible { mass: p.mass })
}

/// The α→0 target `⟨φ|P^P(J_ε) Q_i φ⟩`, computed directly.
pub fn lundeen_target(phi: &WaveFunction, interval: OutcomeBin, eps: f64) -> Result<C64> {
    let grid = *phi.space().require_grid()?;
    let windowed = fourier::momentum_window(&grid, phi.amps(), -0.5 * eps, 0.5 * eps);
    Ok((0..grid.n())
        .filter(|&k| interval.contains(grid.x(k)))
        .map(|k| windowed[k].conj() * phi.amps()[k])
        .sum::<C64>()
        * grid.dx())
}

/// Outcome of a reconstruction attempt; always populated, also on failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub centers: Vec<f64>,
    /// Conditional point estimates. The conditionals do not exist after a
    /// failed postselection; the zero-coupling joint values stand in.
    #[serde(with = "crate::serialize::complex_list")]
    pub points: Vec<C64>,
    #[serde(with = "crate::serialize::complex_list")]
    pub raw_points: Vec<C64>,
    pub estimate: Option<WaveFunction>,
    pub fidelity_vs_truth: Option<f64>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `⟨φ|P^P(J_ε)φ⟩`
    pub postselection_mass: f64,
    pub postselection_failed: bool,
    /// Mass of the true state inside the interval window.
    pub window_mass: Option<f64>,
    pub window_warning: bool,
    pub alpha: f64,
    pub epsilon: f64,
    pub messages: Vec<String>,
}

impl ReconstructionReport {
    /// Error when the postselection failed.
    pub fn ensure_postselected(&self) -> Result<&Self> {
        if self.diagnostics.postselection_failed {
            return Err(Error::PostselectionImpossible { mass: self.diagnostics.postselection_mass });
        }
        Ok(self)
    }
}

/// Scan all intervals, assemble the step-function estimate, normalize it and
/// fix the global phase by making the largest point real positive.
pub fn lundeen_reconstruct(phi_true: &WaveFunction, cfg: &LundeenConfig) -> Result<ReconstructionReport> {
    cfg.validate()?;
    let grid = *phi_true.space().require_grid()?;
    if grid != cfg.grid {
        return Err(Error::SpaceMismatch("state grid differs from the configured grid".into()));
    }
    let intervals = cfg.intervals()?;
    let mut messages = Vec::new();

    let windowed = fourier::momentum_window(&grid, phi_true.amps(), -0.5 * cfg.epsilon, 0.5 * cfg.epsilon);
    let total_mass = windowed.norm_squared() * grid.dx();
    let failed = total_mass <= POSTSELECTION_THRESHOLD;
    if failed {
        messages.push(format!("postselection mass below threshold ({total_mass:.3e})"));
    }

    let window_mass: f64 = (0..grid.n())
        .filter(|&k| grid.x(k) >= cfg.window[0] && grid.x(k) < cfg.window[1])
        .map(|k| phi_true.amps()[k].norm_sqr())
        .sum::<f64>()
        * grid.dx()
        / phi_true.norm_sqr();
    let window_warning = window_mass < 1.0 - 1e-6;
    if window_warning {
        log::warn!("interval window holds only {window_mass:.8} of the state");
        messages.push(format!("interval window holds {window_mass:.8} of the mass"));
    }

    let mut points = Vec::with_capacity(intervals.len());
    let mut raw_points = Vec::with_capacity(intervals.len());
    for b in &intervals {
        let p = lundeen_point_detail(phi_true, *b, cfg.alpha, cfg.epsilon)?;
        raw_points.push(p.raw);
        points.push(if failed { p.weak_limit } else { p.value.unwrap_or(p.weak_limit) });
    }

    let (estimate, fidelity) = if failed {
        (None, Some(0.0))
    } else {
        let est = step_estimate(&grid, &intervals, &points)?;
        let mut truth = phi_true.clone();
        truth.normalize()?;
        let f = est.fidelity(&truth)?.clamp(0.0, 1.0);
        (Some(est), Some(f))
    };

    Ok(ReconstructionReport {
        centers: intervals.iter().map(OutcomeBin::center).collect(),
        points,
        raw_points,
        estimate,
        fidelity_vs_truth: fidelity,
        diagnostics: Diagnostics {
            postselection_mass: total_mass,
            postselection_failed: failed,
            window_mass: Some(window_mass),
            window_warning,
            alpha: cfg.alpha,
            epsilon: cfg.epsilon,
            messages,
        },
    })
}

/// Step function through the points. Each point is divided by the grid
/// measure of its interval, which differs from the nominal width when the
/// width is not a multiple of dx.
fn step_estimate(grid: &GridSpec, intervals: &[OutcomeBin], points: &[C64]) -> Result<WaveFunction> {
    let owner: Vec<Option<usize>> = (0..grid.n()).map(|k| intervals.iter().position(|b| b.contains(grid.x(k)))).collect();
    let mut counts = vec![0usize; intervals.len()];
    for i in owner.iter().flatten() {
        counts[*i] += 1;
    }
    let density: Vec<C64> = points
        .iter()
        .zip(&counts)
        .map(|(p, &c)| if c > 0 { p / (c as f64 * grid.dx()) } else { C64::from(0.0) })
        .collect();
    let lead = density
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .filter(|z| z.norm() > 0.0)
        .ok_or(Error::NormalizationDeficit(1.0))?;
    let phase = lead.conj() / lead.norm();
    let amps = DVector::from_fn(grid.n(), |k, _| owner[k].map_or(C64::from(0.0), |i| density[i] * phase));
    WaveFunction::normalized(Space::Grid(*grid), amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::operator::{qubit_ops, Operator};
    use crate::observables::interval_projection;
    use crate::state::gaussian_state;

    #[test]
    fn coupling_limits_and_exponential_oracle() {
        let g = GridSpec::new(64, 16.0).unwrap();
        let phi = gaussian_state(g, 1.0, 0.3, 0.4).unwrap();
        let ket0 = WaveFunction::ket0();
        let i = OutcomeBin::new(-0.5, 0.5).unwrap();
        let zero = lundeen_couple(&phi, i, 0.0).unwrap();
        assert!((zero.amps() - phi.tensor(&ket0).amps()).camax() < 1e-15);
        let whole = OutcomeBin::new(-8.0, 8.0).unwrap();
        let a: f64 = 0.3;
        let spin = WaveFunction::qubit(C64::from(a.cos()), C64::from(a.sin())).unwrap();
        let all = lundeen_couple(&phi, whole, a).unwrap();
        assert!((all.amps() - phi.tensor(&spin).amps()).camax() < 1e-15);

        let qi = interval_projection(&g, i).unwrap();
        let gen = qi.tensor(&qubit_ops().sigma_y).scale(-a);
        let u = (gen.matrix() * C64::i()).exp();
        let oracle = u * phi.tensor(&ket0).amps();
        let coupled = lundeen_couple(&phi, i, a).unwrap();
        assert!((coupled.amps() - oracle).camax() < 1e-10);
        assert!((coupled.norm() - 1.0).abs() < 1e-10);
        let _ = Operator::identity(Space::Qubit);
    }

    #[test]
    fn uncoupled_conditionals() {
        let g = GridSpec::new(128, 24.0).unwrap();
        let phi = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
        let psi = lundeen_couple(&phi, OutcomeBin::new(-0.5, 0.5).unwrap(), 0.0).unwrap();
        let cx = lundeen_conditionals(&psi, 4.0 * g.dp(), Pauli::X).unwrap();
        assert!((cx.weights()[0] - 0.5).abs() < 1e-12);
        let cy = lundeen_conditionals(&psi, 4.0 * g.dp(), Pauli::Y).unwrap();
        assert!(cy.mean().abs() < 1e-12);
    }

    #[test]
    fn conditionals_match_dense_simulation() {
        let g = GridSpec::new(512, 40.0).unwrap();
        let phi = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
        let i = OutcomeBin::new(-0.5, 0.5).unwrap();
        let (alpha, eps) = (0.1, 4.0 * g.dp());
        let psi = lundeen_couple(&phi, i, alpha).unwrap();
        // dense oracle: explicit momentum-window projector ⊗ spin projectors
        let n = g.n();
        let mut window = nalgebra::DMatrix::<C64>::zeros(n, n);
        for m in 0..n {
            if g.p(m).abs() < 0.5 * eps - 1e-9 {
                let mut e = DVector::zeros(n);
                e[m] = C64::from(1.0);
                let f = fourier::inverse(&g, &e);
                window += &f * f.adjoint();
            }
        }
        let ops = qubit_ops();
        let amps = psi.amps();
        let w = g.dx();
        let post = linalg::kron(&window, &nalgebra::DMatrix::identity(2, 2));
        let mass = linalg::sandwich(amps, &post, amps).re * w;
        for (pauli, s) in [(Pauli::X, &ops.sigma_x), (Pauli::Y, &ops.sigma_y)] {
            let op = linalg::kron(&window, s.matrix());
            let mean = linalg::sandwich(amps, &op, amps).re * w / mass;
            let c = lundeen_conditionals(&psi, eps, pauli).unwrap();
            assert!((c.mean() - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn point_converges_quadratically_in_alpha() {
        let g = GridSpec::new(512, 40.0).unwrap();
        let phi = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
        let eps = 4.0 * g.dp();
        let i = OutcomeBin::new(0.25, 0.5).unwrap();
        let mass = {
            let w = fourier::momentum_window(&g, phi.amps(), -0.5 * eps, 0.5 * eps);
            w.norm_squared() * g.dx()
        };
        let target = lundeen_target(&phi, i, eps).unwrap() / mass;
        let e1 = (lundeen_point(&phi, i, 0.1, eps).unwrap() - target).norm();
        let e2 = (lundeen_point(&phi, i, 0.05, eps).unwrap() - target).norm();
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn two_coupling_elimination_hits_the_target() {
        let g = GridSpec::default();
        let phi = gaussian_state(g, 1.0, 0.3, 0.2).unwrap();
        let eps = 4.0 * g.dp();
        let i = OutcomeBin::new(-0.25, 0.5).unwrap();
        let p = lundeen_point_detail(&phi, i, 0.05, eps).unwrap();
        let target = lundeen_target(&phi, i, eps).unwrap();
        assert!((p.weak_limit - target).norm() < 1e-12);
        assert!((p.raw - target).norm() > 1e-6);
    }

    #[test]
    fn band_limited_totals() {
        let g = GridSpec::new(256, 32.0).unwrap();
        let dp = g.dp();
        let phi = WaveFunction::from_fn(g, |x| C64::from(1.0 + 0.5 * (dp * x).cos())).unwrap();
        let eps = 4.0 * g.dp();
        let windowed = fourier::momentum_window(&g, phi.amps(), -0.5 * eps, 0.5 * eps);
        assert!((windowed - phi.amps()).camax() < 1e-12);
        let intervals = uniform_bins(-16.0, 16.0, 16).unwrap();
        let sum: C64 = intervals.iter().map(|b| lundeen_point_detail(&phi, *b, 1e-3, eps).unwrap().raw).sum();
        assert!((sum - C64::from(1.0)).norm() < 1e-5);
        assert!(intervals.iter().all(|b| lundeen_target(&phi, *b, eps).unwrap().norm() > 1e-3));
    }

    #[test]
    fn config_validation() {
        let g = GridSpec::default();
        let mut cfg = LundeenConfig::default_for(g);
        assert!(cfg.validate().is_ok());
        cfg.alpha = 0.0;
        assert!(cfg.validate().is_err());
        cfg.alpha = 1.0;
        assert!(cfg.validate().is_err());
        cfg.alpha = 0.05;
        cfg.epsilon = 0.5 * g.dp();
        assert!(cfg.validate().is_err());
    }
}
