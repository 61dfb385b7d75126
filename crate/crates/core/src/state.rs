//! Vector states and density operators.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::linalg;
use crate::operator::Operator;
use crate::space::Space;

/// A vector state: amplitudes on a [`Space`].
///
/// On a grid the amplitudes are samples `φ(x_k)` and `‖φ‖² = Σ|φ_k|²·dx`.
/// Qubit and hybrid (grid ⊗ qubit) states use the same type with the
/// appropriate space tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    space: Space,
    #[serde(with = "crate::serialize::complex_vec")]
    amps: DVector<C64>,
}

impl WaveFunction {
    pub fn new(space: Space, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::ShapeMismatch { expected: space.dim(), found: amps.len() });
        }
        Ok(Self { space, amps })
    }

    /// Construct and rescale to unit norm.
    pub fn normalized(space: Space, amps: DVector<C64>) -> Result<Self> {
        let mut psi = Self::new(space, amps)?;
        psi.normalize()?;
        Ok(psi)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amps(self) -> DVector<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Weighted inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &WaveFunction) -> Result<C64> {
        self.space.ensure_same(&other.space)?;
        Ok(self.amps.dotc(&other.amps) * self.space.weight())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared() * self.space.weight()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter { name: "state", reason: "zero or non-finite norm".into() });
        }
        self.amps.unscale_mut(norm);
        Ok(())
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() < tol
    }

    pub fn tensor(&self, other: &WaveFunction) -> WaveFunction {
        WaveFunction { space: self.space.tensor(&other.space), amps: linalg::kron_vec(&self.amps, &other.amps) }
    }

    pub fn apply(&self, op: &Operator) -> Result<WaveFunction> {
        self.space.ensure_same(op.space())?;
        Ok(WaveFunction { space: self.space.clone(), amps: op.matrix() * &self.amps })
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &WaveFunction) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }

    pub fn qubit(a: C64, b: C64) -> Result<Self> {
        Self::normalized(Space::Qubit, DVector::from_vec(vec![a, b]))
    }

    pub fn ket0() -> Self {
        Self { space: Space::Qubit, amps: DVector::from_vec(vec![linalg::ONE, linalg::ZERO]) }
    }

    pub fn ket1() -> Self {
        Self { space: Space::Qubit, amps: DVector::from_vec(vec![linalg::ZERO, linalg::ONE]) }
    }

    /// Samples of a function on a grid, renormalized.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> C64) -> Result<Self> {
        let amps = DVector::from_fn(grid.n(), |k, _| f(grid.x(k)));
        Self::normalized(Space::Grid(grid), amps)
    }
}

/// Gaussian `(Δ√(2π))^{-1/2} exp(-(x-x0)²/(4Δ²)) exp(i p0 x)`, renormalized on
/// the grid. Position variance is Δ², momentum variance `1/(4Δ²)`.
pub fn gaussian_state(grid: GridSpec, delta: f64, x0: f64, p0: f64) -> Result<WaveFunction> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter { name: "delta", reason: format!("{delta} must be positive") });
    }
    let half = 0.5 * grid.length();
    if x0 - 5.0 * delta < -half || x0 + 5.0 * delta > half {
        return Err(Error::InvalidParameter {
            name: "x0",
            reason: format!("±5Δ window around {x0} leaves the grid [-{half}, {half})"),
        });
    }
    if p0.abs() + 5.0 / (2.0 * delta) > grid.p_max() {
        return Err(Error::InvalidParameter {
            name: "p0",
            reason: format!("momentum window around {p0} exceeds the grid band limit {}", grid.p_max()),
        });
    }
    let amp = (delta * (2.0 * PI).sqrt()).sqrt().recip();
    let amps = DVector::from_fn(grid.n(), |k, _| {
        let x = grid.x(k);
        C64::from_polar(amp * (-(x - x0).powi(2) / (4.0 * delta * delta)).exp(), p0 * x)
    });
    let mass = amps.norm_squared() * grid.dx();
    if (mass - 1.0).abs() > 1e-12 {
        log::warn!("gaussian_state: grid truncation changes the mass by {:.3e}", mass - 1.0);
    }
    WaveFunction::normalized(Space::Grid(grid), amps)
}

/// A density operator. On a grid the matrix holds kernel samples ρ(x_j, x_k)
/// and `tr ρ = Σ ρ_kk·dx`; on finite factors the plain trace is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOperator {
    space: Space,
    #[serde(with = "crate::serialize::complex_matrix")]
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-10;

    /// Validated constructor: positive semidefinite with unit trace.
    pub fn new(space: Space, matrix: DMatrix<C64>) -> Result<Self> {
        let rho = Self::unchecked(space, matrix)?;
        let dev = linalg::hermitian_deviation(&rho.matrix);
        if dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        let min = linalg::herm_eigenvalues(&rho.orthonormal_matrix()).first().copied().unwrap_or(0.0);
        if min < -Self::POSITIVITY_TOL {
            return Err(Error::NotPositive(min));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidParameter { name: "rho", reason: format!("trace {tr} ≠ 1") });
        }
        Ok(rho)
    }

    fn unchecked(space: Space, matrix: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::ShapeMismatch { expected: d, found: matrix.nrows() });
        }
        Ok(Self { space, matrix })
    }

    pub fn from_pure(psi: &WaveFunction) -> Self {
        let mut psi = psi.clone();
        let _ = psi.normalize();
        Self { space: psi.space().clone(), matrix: linalg::outer(psi.amps(), psi.amps()) }
    }

    /// Convex mixture Σ w_i |ψ_i⟩⟨ψ_i|; weights are renormalized.
    pub fn mixture(components: &[(f64, WaveFunction)]) -> Result<Self> {
        let first = components
            .first()
            .ok_or(Error::InvalidParameter { name: "components", reason: "empty mixture".into() })?;
        let space = first.1.space().clone();
        let total: f64 = components.iter().map(|(w, _)| *w).sum();
        if components.iter().any(|(w, _)| *w < 0.0) || !(total > 0.0) {
            return Err(Error::InvalidParameter { name: "weights", reason: "must be nonnegative".into() });
        }
        let d = space.dim();
        let mut m = DMatrix::zeros(d, d);
        for (w, psi) in components {
            space.ensure_same(psi.space())?;
            let mut psi = psi.clone();
            psi.normalize()?;
            m += linalg::outer(psi.amps(), psi.amps()) * C64::from(*w / total);
        }
        Ok(Self { space, matrix: m })
    }

    /// Nearest state in the positive unit-trace cone: eigenvalue clipping at
    /// zero followed by trace renormalization.
    pub fn project_to_states(space: Space, matrix: DMatrix<C64>) -> Result<Self> {
        let w = space.weight();
        let rho = Self::unchecked(space, linalg::hermitian_part(&matrix))?;
        let (values, vectors) = linalg::herm_eigen(&rho.orthonormal_matrix());
        let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
        if !(total > 0.0) {
            return Err(Error::NotPositive(values.last().copied().unwrap_or(0.0)));
        }
        let clipped = linalg::spectral_map(&values, &vectors, |v| v.max(0.0) / (total * w));
        Ok(Self { space: rho.space, matrix: clipped })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Matrix in an orthonormal basis: `weight · ρ`.
    pub fn orthonormal_matrix(&self) -> DMatrix<C64> {
        self.matrix.scale(self.space.weight())
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.matrix) * self.space.weight()
    }

    pub fn purity(&self) -> f64 {
        let o = self.orthonormal_matrix();
        linalg::trace(&(&o * &o)).re
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        self.space.ensure_same(&other.space)?;
        let diff = (&self.matrix - &other.matrix).scale(self.space.weight());
        Ok(0.5 * linalg::herm_eigenvalues(&diff).iter().map(|v| v.abs()).sum::<f64>())
    }

    /// Eigen-components with weight above `tol`, as normalized vector states.
    pub fn components(&self, tol: f64) -> Vec<(f64, WaveFunction)> {
        let (values, vectors) = linalg::herm_eigen(&self.orthonormal_matrix());
        let w = self.space.weight();
        values
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, v)| **v > tol)
            .map(|(c, v)| {
                let amps = vectors.column(c).into_owned() / C64::from(w.sqrt());
                (*v, WaveFunction { space: self.space.clone(), amps })
            })
            .collect()
    }

    /// `W ρ W†` for an operator on the same space.
    pub fn conjugate(&self, op: &Operator) -> Result<DensityOperator> {
        self.space.ensure_same(op.space())?;
        let m = op.matrix() * &self.matrix * op.matrix().adjoint();
        Ok(DensityOperator { space: self.space.clone(), matrix: m })
    }
}

/// Anything an expectation value can be taken in.
pub trait QuantumState {
    fn space(&self) -> &Space;
    fn expectation(&self, op: &Operator) -> Result<C64>;
    fn to_density(&self) -> DensityOperator;
}

impl QuantumState for WaveFunction {
    fn space(&self) -> &Space {
        &self.space
    }

    fn expectation(&self, op: &Operator) -> Result<C64> {
        self.space.ensure_same(op.space())?;
        Ok(linalg::sandwich(&self.amps, op.matrix(), &self.amps) * self.space.weight())
    }

    fn to_density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }
}

impl QuantumState for DensityOperator {
    fn space(&self) -> &Space {
        &self.space
    }

    fn expectation(&self, op: &Operator) -> Result<C64> {
        self.space.ensure_same(op.space())?;
        Ok((&self.matrix * op.matrix()).trace() * self.space.weight())
    }

    fn to_density(&self) -> DensityOperator {
        self.clone()
    }
}

/// `⟨φ|Mφ⟩` for vector states or `tr[ρM]` for density operators.
pub fn expectation<S: QuantumState + ?Sized>(op: &Operator, state: &S) -> Result<C64> {
    state.expectation(op)
}
