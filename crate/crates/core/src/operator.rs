//! Dense operators and the canonical operators of the discretized line.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::GridSpec;
use crate::linalg;
use crate::space::Space;
use crate::state::WaveFunction;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Hermitian,
    Unitary,
    General,
}

/// A dense matrix acting on amplitude vectors of a [`Space`].
///
/// Operators are independent of the quadrature weight: the matrix acting on
/// samples is the same as the matrix in the orthonormal basis. The kind flag
/// is only set by constructors that verified it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    space: Space,
    #[serde(with = "crate::serialize::complex_matrix")]
    matrix: DMatrix<C64>,
    kind: OpKind,
}

impl Operator {
    pub fn general(space: Space, matrix: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::ShapeMismatch { expected: d, found: matrix.nrows() });
        }
        Ok(Self { space, matrix, kind: OpKind::General })
    }

    pub fn hermitian(space: Space, matrix: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::general(space, matrix)?;
        let dev = linalg::hermitian_deviation(&op.matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        op.kind = OpKind::Hermitian;
        Ok(op)
    }

    pub fn unitary(space: Space, matrix: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::general(space, matrix)?;
        let dev = op.unitarity_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        op.kind = OpKind::Unitary;
        Ok(op)
    }

    /// Hermitian operator from a matrix that is hermitian up to roundoff;
    /// the hermitian part is stored.
    pub fn symmetrized(space: Space, matrix: DMatrix<C64>) -> Result<Self> {
        Self::hermitian(space, linalg::hermitian_part(&matrix))
    }

    pub fn identity(space: Space) -> Self {
        let d = space.dim();
        Self { space, matrix: DMatrix::identity(d, d), kind: OpKind::Hermitian }
    }

    pub fn zero(space: Space) -> Self {
        let d = space.dim();
        Self { space, matrix: DMatrix::zeros(d, d), kind: OpKind::Hermitian }
    }

    pub fn diagonal(space: Space, diag: impl IntoIterator<Item = f64>) -> Result<Self> {
        let v: Vec<C64> = diag.into_iter().map(C64::from).collect();
        Self::hermitian(space, DMatrix::from_diagonal(&DVector::from_vec(v)))
    }

    /// `|ψ⟩⟨ψ|` with the space weight folded in, so that it acts as the
    /// orthogonal projection for normalized ψ.
    pub fn projector(psi: &WaveFunction) -> Self {
        let m = linalg::outer(psi.amps(), psi.amps()).scale(psi.space().weight());
        Self { space: psi.space().clone(), matrix: linalg::hermitian_part(&m), kind: OpKind::Hermitian }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn kind(&self) -> OpKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::hermitian_deviation(&self.matrix)
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim();
        linalg::max_abs_diff(&(self.matrix.adjoint() * &self.matrix), &DMatrix::identity(d, d))
    }

    /// Max-norm distance to another operator on the same space.
    pub fn distance(&self, other: &Operator) -> f64 {
        if self.space != other.space {
            return f64::INFINITY;
        }
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        linalg::max_abs_diff(&(&self.matrix * &self.matrix), &self.matrix) < tol
    }

    pub fn adjoint(&self) -> Operator {
        let kind = match self.kind {
            OpKind::General => OpKind::General,
            k => k,
        };
        Operator { space: self.space.clone(), matrix: self.matrix.adjoint(), kind }
    }

    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.space.ensure_same(&other.space)?;
        let kind = if self.kind == OpKind::Unitary && other.kind == OpKind::Unitary {
            OpKind::Unitary
        } else {
            OpKind::General
        };
        Ok(Operator { space: self.space.clone(), matrix: &self.matrix * &other.matrix, kind })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.space.ensure_same(&other.space)?;
        let kind = if self.kind == OpKind::Hermitian && other.kind == OpKind::Hermitian {
            OpKind::Hermitian
        } else {
            OpKind::General
        };
        Ok(Operator { space: self.space.clone(), matrix: &self.matrix + &other.matrix, kind })
    }

    pub fn scale(&self, s: f64) -> Operator {
        let kind = if self.kind == OpKind::Hermitian { OpKind::Hermitian } else { OpKind::General };
        Operator { space: self.space.clone(), matrix: self.matrix.scale(s), kind }
    }

    pub fn tensor(&self, other: &Operator) -> Operator {
        let kind = if self.kind == other.kind { self.kind } else { OpKind::General };
        Operator { space: self.space.tensor(&other.space), matrix: linalg::kron(&self.matrix, &other.matrix), kind }
    }

    pub fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        psi.apply(self)
    }

    /// Spectral decomposition of a hermitian operator with eigenvalues
    /// grouped within `tol`: pairs of (eigenvalue, spectral projection).
    pub fn spectral_projections(&self, tol: f64) -> Result<Vec<(f64, Operator)>> {
        let dev = self.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let (values, vectors) = linalg::herm_eigen(&self.matrix);
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (i, &v) in values.iter().enumerate() {
            match groups.last_mut() {
                Some((lead, members)) if (v - *lead).abs() <= tol => members.push(i),
                _ => groups.push((v, vec![i])),
            }
        }
        let d = self.dim();
        Ok(groups
            .into_iter()
            .map(|(_, members)| {
                let mean = members.iter().map(|&i| values[i]).sum::<f64>() / members.len() as f64;
                let mut p = DMatrix::zeros(d, d);
                for &i in &members {
                    let v = vectors.column(i);
                    p += &v * v.adjoint();
                }
                (mean, Operator { space: self.space.clone(), matrix: p, kind: OpKind::Hermitian })
            })
            .collect())
    }

    /// Eigenvalues of a hermitian operator, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::herm_eigenvalues(&self.matrix)
    }
}

/// `Q = diag(x_k)`.
pub fn position_operator(grid: GridSpec) -> Operator {
    Operator::diagonal(Space::Grid(grid), grid.points()).expect("diagonal is hermitian")
}

/// `P = F† diag(p_m) F` with the centered unitary transform, symmetrized.
pub fn momentum_operator(grid: GridSpec) -> Operator {
    let matrix = columns_of(grid, |col| fourier::momentum_multiplier(&grid, col, C64::from));
    Operator::symmetrized(Space::Grid(grid), matrix).expect("spectral momentum is hermitian")
}

/// `W_{qp} = e^{iqp/2} e^{-iqP} e^{ipQ}`.
pub fn weyl_operator(grid: GridSpec, q: f64, p: f64) -> Result<Operator> {
    check_weyl_range(&grid, q, p)?;
    let matrix = columns_of(grid, |col| apply_weyl(&grid, q, p, col));
    Operator::unitary(Space::Grid(grid), matrix)
}

pub(crate) fn check_weyl_range(grid: &GridSpec, q: f64, p: f64) -> Result<()> {
    if q.abs() > 0.5 * grid.length() {
        return Err(Error::InvalidParameter { name: "q", reason: format!("|{q}| exceeds L/2") });
    }
    if p.abs() > grid.p_max() {
        return Err(Error::InvalidParameter { name: "p", reason: format!("|{p}| exceeds π/dx") });
    }
    Ok(())
}

/// Action of the Weyl operator on an amplitude vector, without building the matrix.
pub fn apply_weyl(grid: &GridSpec, q: f64, p: f64, amps: &DVector<C64>) -> DVector<C64> {
    let boosted = DVector::from_fn(grid.n(), |k, _| amps[k] * C64::from_polar(1.0, p * grid.x(k)));
    fourier::translate(grid, &boosted, q) * C64::from_polar(1.0, 0.5 * q * p)
}

fn columns_of(grid: GridSpec, f: impl Fn(&DVector<C64>) -> DVector<C64>) -> DMatrix<C64> {
    let n = grid.n();
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut e = DVector::zeros(n);
        e[k] = C64::from(1.0);
        m.set_column(k, &f(&e));
    }
    m
}

/// Pauli matrices and computational basis kets.
#[derive(Debug, Clone)]
pub struct QubitOps {
    pub sigma_x: Operator,
    pub sigma_y: Operator,
    pub sigma_z: Operator,
    pub ket0: WaveFunction,
    pub ket1: WaveFunction,
}

pub fn qubit_ops() -> QubitOps {
    let i = C64::i();
    let (o, z) = (C64::from(1.0), C64::from(0.0));
    let m = |a: [C64; 4]| Operator::hermitian(Space::Qubit, DMatrix::from_row_slice(2, 2, &a)).unwrap();
    QubitOps {
        sigma_x: m([z, o, o, z]),
        sigma_y: m([z, -i, i, z]),
        sigma_z: m([o, z, z, -o]),
        ket0: WaveFunction::ket0(),
        ket1: WaveFunction::ket1(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{expectation, gaussian_state, DensityOperator};
    use std::f64::consts::PI;

    fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        // composite Simpson
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn position_eigenvalues_and_means() {
        let g = GridSpec::new(16, 16.0).unwrap();
        let q = position_operator(g);
        let ev = q.eigenvalues();
        for (k, v) in ev.iter().enumerate() {
            assert!((v - (k as f64 - 8.0)).abs() < 1e-12);
        }
        let g = GridSpec::new(256, 32.0).unwrap();
        let q = position_operator(g);
        let centered = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
        assert!(expectation(&q, &centered).unwrap().norm() < 1e-10);
        let shifted = gaussian_state(g, 1.0, 1.5, 0.0).unwrap();
        // quadrature oracle: ∫ x |φ(x - 1.5)|² dx
        let dens = |x: f64| (-(x - 1.5f64).powi(2) / 2.0).exp() / (2.0 * PI).sqrt();
        let oracle = quad(|x| x * dens(x), -14.0, 17.0, 4000);
        assert!((expectation(&q, &shifted).unwrap().re - oracle).abs() < 1e-8);
    }

    #[test]
    fn momentum_moments() {
        let g = GridSpec::new(256, 32.0).unwrap();
        let p = momentum_operator(g);
        let real = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
        assert!(expectation(&p, &real).unwrap().norm() < 1e-10);
        let narrow = gaussian_state(g, 0.5f64.sqrt(), 0.0, 0.0).unwrap();
        let p2 = p.compose(&p).unwrap();
        assert!((expectation(&p2, &narrow).unwrap().re - 0.5).abs() < 1e-6);
        let boosted = gaussian_state(g, 1.0, 0.0, 2.0).unwrap();
        // momentum density |φ̂(p)|² is a normal density centred at p0 with variance 1/(4Δ²)
        let dens = |k: f64| (-(k - 2.0f64).powi(2) * 2.0).exp() / (0.5 * PI).sqrt();
        let oracle = quad(|k| k * dens(k), -8.0, 12.0, 4000);
        assert!((expectation(&p, &boosted).unwrap().re - oracle).abs() < 1e-6);
    }

    #[test]
    fn gaussian_moments() {
        let g = GridSpec::default();
        let q = position_operator(g);
        let p = momentum_operator(g);
        let qp = q.compose(&p).unwrap();
        let phi = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
        assert!(expectation(&q, &phi).unwrap().norm() < 1e-8);
        assert!(expectation(&p, &phi).unwrap().norm() < 1e-8);
        assert!((expectation(&q.compose(&q).unwrap(), &phi).unwrap().re - 1.0).abs() < 1e-8);
        for delta in [0.5f64.sqrt(), 1.3] {
            let phi = gaussian_state(g, delta, 0.0, 0.0).unwrap();
            let v = expectation(&qp, &phi).unwrap();
            assert!((v - C64::new(0.0, 0.5)).norm() < 1e-8, "{v}");
        }
        let moved = gaussian_state(g, 1.0, 3.0, -1.0).unwrap();
        assert!((expectation(&q, &moved).unwrap().re - 3.0).abs() < 1e-6);
        assert!((expectation(&p, &moved).unwrap().re + 1.0).abs() < 1e-6);
    }

    #[test]
    fn canonical_commutator_on_gaussians() {
        let g = GridSpec::new(512, 40.0).unwrap();
        let q = position_operator(g);
        let p = momentum_operator(g);
        let comm = q.compose(&p).unwrap().add(&p.compose(&q).unwrap().scale(-1.0)).unwrap();
        for delta in [0.5, 1.0, 1.5, 2.0] {
            let phi = gaussian_state(g, delta, 0.0, 0.0).unwrap();
            let v = expectation(&comm, &phi).unwrap();
            assert!((v - C64::i()).norm() < 2e-3);
        }
    }

    #[test]
    fn weyl_basics() {
        let g = GridSpec::new(256, 32.0).unwrap();
        let w0 = weyl_operator(g, 0.0, 0.0).unwrap();
        assert!(w0.distance(&Operator::identity(Space::Grid(g))) < 1e-12);
        let w = weyl_operator(g, 1.3, -0.7).unwrap();
        assert!(w.unitarity_deviation() < 1e-10);
        let phi = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
        let moved = w.apply(&phi).unwrap();
        let w1 = weyl_operator(g, 1.0, 0.0).unwrap().apply(&phi).unwrap();
        let oracle = gaussian_state(g, 1.0, 1.0, 0.0).unwrap();
        assert!((w1.amps() - oracle.amps()).camax() < 1e-10);
        assert!((expectation(&position_operator(g), &w1).unwrap().re - 1.0).abs() < 1e-6);
        assert!((moved.norm() - 1.0).abs() < 1e-12);
        assert!(weyl_operator(g, 17.0, 0.0).is_err());
    }

    #[test]
    fn pauli_algebra() {
        let ops = qubit_ops();
        let x0 = ops.ket0.apply(&ops.sigma_x).unwrap();
        assert!((x0.amps() - ops.ket1.amps()).camax() < 1e-15);
        let ev = ops.sigma_y.eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
        assert!(expectation(&ops.sigma_y, &ops.ket0).unwrap().norm() < 1e-15);
        for s in [&ops.sigma_x, &ops.sigma_y] {
            assert!(s.compose(s).unwrap().distance(&Operator::identity(Space::Qubit)) < 1e-15);
        }
        let plus = WaveFunction::qubit(C64::from(1.0), C64::from(1.0)).unwrap();
        let p0 = Operator::projector(&ops.ket0);
        assert!((expectation(&p0, &plus).unwrap().re - 0.5).abs() < 1e-15);
        assert!((expectation(&Operator::identity(Space::Qubit), &plus).unwrap().re - 1.0).abs() < 1e-15);
        let rho = DensityOperator::from_pure(&plus);
        assert!((expectation(&p0, &rho).unwrap().re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_shape_mismatch() {
        let ops = qubit_ops();
        let g = GridSpec::new(16, 16.0).unwrap();
        let phi = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
        assert!(expectation(&ops.sigma_x, &phi).is_err());
    }
}
