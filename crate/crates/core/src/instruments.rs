//! Instruments in Kraus form, measurement schemes and their sequential
//! composition.
//!
//! A scheme couples the system to a probe through a unitary, reads a pointer
//! observable on the probe and rescales the reading by `1/λ`. The induced
//! instrument has Kraus operators
//!
//! ```text
//! K_{X,α} = (I ⊗ ⟨e_α|)(I ⊗ Z(X)^{1/2}) U (I ⊗ |σ⟩)
//! ```
//!
//! For couplings `e^{-iλA⊗P}` the unitary is never formed: in the eigenbranch
//! `a` of `A` it translates the probe by `λa`, so position- and
//! momentum-pointer Kraus operators are diagonal in the branches.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::GridSpec;
use crate::linalg;
use crate::observables::{check_lambda, naimark_dilate, BinnedObservable, NaimarkDilation, OutcomeBin};
use crate::operator::{position_operator, Operator};
use crate::space::Space;
use crate::state::{expectation, DensityOperator, WaveFunction};

/// Tolerance on `Σ w K†K = I`.
pub const CLOSURE_TOL: f64 = 1e-8;
/// Closure deviation beyond which a sampled Kraus family is rejected.
pub const RESOLUTION_TOL: f64 = 1e-4;

/// Outcome-indexed Kraus families with a quadrature weight per outcome:
/// `I(X)(ρ) = Σ_{x∈X} w_x Σ_α K_{x,α} ρ K_{x,α}†`.
#[derive(Debug, Clone)]
pub struct Instrument {
    space: Space,
    bins: Vec<OutcomeBin>,
    kraus: Vec<Vec<DMatrix<C64>>>,
    weights: Vec<f64>,
}

impl Instrument {
    pub fn new(space: Space, bins: Vec<OutcomeBin>, kraus: Vec<Vec<DMatrix<C64>>>, weights: Vec<f64>) -> Result<Self> {
        let instr = Self::unchecked(space, bins, kraus, weights)?;
        let dev = instr.closure_deviation();
        if dev > CLOSURE_TOL {
            return Err(Error::InvalidParameter {
                name: "kraus",
                reason: format!("not trace preserving (deviation {dev:.3e})"),
            });
        }
        Ok(instr)
    }

    fn unchecked(space: Space, bins: Vec<OutcomeBin>, kraus: Vec<Vec<DMatrix<C64>>>, weights: Vec<f64>) -> Result<Self> {
        if bins.len() != kraus.len() || bins.len() != weights.len() {
            return Err(Error::ShapeMismatch { expected: bins.len(), found: kraus.len().min(weights.len()) });
        }
        let d = space.dim();
        for k in kraus.iter().flatten() {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::ShapeMismatch { expected: d, found: k.nrows() });
            }
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidParameter { name: "weights", reason: "must be positive".into() });
        }
        Ok(Self { space, bins, kraus, weights })
    }

    /// The instrument `ρ ↦ ρ` with a single outcome.
    pub fn identity(space: Space, bin: OutcomeBin) -> Self {
        let d = space.dim();
        Self { space, bins: vec![bin], kraus: vec![vec![DMatrix::identity(d, d)]], weights: vec![1.0] }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn bins(&self) -> &[OutcomeBin] {
        &self.bins
    }

    pub fn kraus(&self, i: usize) -> &[DMatrix<C64>] {
        &self.kraus[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn all(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    /// `‖Σ w K†K − I‖_max`.
    pub fn closure_deviation(&self) -> f64 {
        let d = self.space.dim();
        let mut sum = DMatrix::<C64>::zeros(d, d);
        for (ks, w) in self.kraus.iter().zip(&self.weights) {
            for k in ks {
                sum += k.adjoint() * k * C64::from(*w);
            }
        }
        linalg::max_abs_diff(&sum, &DMatrix::identity(d, d))
    }

    /// Dual action `I(X)*(B) = Σ w K† B K`.
    pub fn dual_apply(&self, indices: &[usize], b: &Operator) -> Result<Operator> {
        self.space.ensure_same(b.space())?;
        let d = self.space.dim();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for &i in indices {
            self.check_index(i)?;
            for k in &self.kraus[i] {
                out += k.adjoint() * b.matrix() * k * C64::from(self.weights[i]);
            }
        }
        Operator::general(self.space.clone(), out)
    }

    /// Unnormalized output state `I(X)(ρ)` as a matrix in the grid convention.
    pub fn apply(&self, indices: &[usize], rho: &DensityOperator) -> Result<DMatrix<C64>> {
        self.space.ensure_same(rho.space())?;
        let d = self.space.dim();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for &i in indices {
            self.check_index(i)?;
            for k in &self.kraus[i] {
                out += k * rho.matrix() * k.adjoint() * C64::from(self.weights[i]);
            }
        }
        Ok(out)
    }

    /// `tr[I(X)(ρ)]`.
    pub fn probability(&self, indices: &[usize], rho: &DensityOperator) -> Result<f64> {
        Ok((linalg::trace(&self.apply(indices, rho)?) * self.space.weight()).re)
    }

    /// `⟨φ|I(x)*(B)φ⟩` for every outcome, evaluated as `Σ w ⟨Kφ|B Kφ⟩`.
    pub fn dual_expectations(&self, b: &Operator, phi: &WaveFunction) -> Result<Vec<C64>> {
        self.space.ensure_same(b.space())?;
        self.space.ensure_same(phi.space())?;
        let w = self.space.weight();
        Ok(self
            .kraus
            .iter()
            .zip(&self.weights)
            .map(|(ks, wx)| {
                ks.iter()
                    .map(|k| {
                        let v = k * phi.amps();
                        linalg::sandwich(&v, b.matrix(), &v)
                    })
                    .sum::<C64>()
                    * (w * wx)
            })
            .collect())
    }

    /// The observable `X ↦ I(X)*(I)`.
    pub fn measured_observable(&self) -> Result<BinnedObservable> {
        let ident = Operator::identity(self.space.clone());
        let effects = (0..self.len())
            .map(|i| self.dual_apply(&[i], &ident).map(|op| linalg::hermitian_part(op.matrix())))
            .collect::<Result<Vec<_>>>()?;
        BinnedObservable::new(self.space.clone(), self.bins.clone(), effects)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::InvalidParameter { name: "outcome", reason: format!("index {i} out of range") });
        }
        Ok(())
    }
}

pub fn dual_apply(instr: &Instrument, indices: &[usize], b: &Operator) -> Result<Operator> {
    instr.dual_apply(indices, b)
}

/// Sequential composition `I₁₂(X×Y) = I₂(Y)∘I₁(X)` with product outcomes
/// flattened first-major and labelled by their flat index.
pub fn sequential_instrument(first: &Instrument, second: &Instrument) -> Result<Instrument> {
    first.space.ensure_same(&second.space)?;
    let mut bins = Vec::new();
    let mut kraus = Vec::new();
    let mut weights = Vec::new();
    for i in 0..first.len() {
        for j in 0..second.len() {
            bins.push(OutcomeBin::around((i * second.len() + j) as f64, 1.0)?);
            let mut ks = Vec::new();
            for k1 in &first.kraus[i] {
                for k2 in &second.kraus[j] {
                    ks.push(k2 * k1);
                }
            }
            kraus.push(ks);
            weights.push(first.weights[i] * second.weights[j]);
        }
    }
    Instrument::new(first.space.clone(), bins, kraus, weights)
}

/// Joint observable `M(X_i × Y_j) = I₁(X_i)*(F(Y_j))` of a sequential
/// measurement.
#[derive(Debug, Clone)]
pub struct JointObservable {
    space: Space,
    first_bins: Vec<OutcomeBin>,
    second_bins: Vec<OutcomeBin>,
    effects: Vec<Vec<Operator>>,
}

impl JointObservable {
    pub fn first_bins(&self) -> &[OutcomeBin] {
        &self.first_bins
    }

    pub fn second_bins(&self) -> &[OutcomeBin] {
        &self.second_bins
    }

    pub fn effect(&self, i: usize, j: usize) -> &Operator {
        &self.effects[i][j]
    }

    /// `Σ_j M(X_i × Y_j)`.
    pub fn first_margin(&self, i: usize) -> DMatrix<C64> {
        self.effects[i].iter().fold(DMatrix::zeros(self.space.dim(), self.space.dim()), |acc, e| acc + e.matrix())
    }

    /// `Σ_i M(X_i × Y_j)`.
    pub fn second_margin(&self, j: usize) -> DMatrix<C64> {
        self.effects.iter().fold(DMatrix::zeros(self.space.dim(), self.space.dim()), |acc, row| acc + row[j].matrix())
    }

    /// The same POVM over flat outcome labels `i·|Y| + j`.
    pub fn as_binned(&self) -> Result<BinnedObservable> {
        let ny = self.second_bins.len();
        let mut bins = Vec::new();
        let mut effects = Vec::new();
        for (i, row) in self.effects.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                bins.push(OutcomeBin::around((i * ny + j) as f64, 1.0)?);
                effects.push(linalg::hermitian_part(e.matrix()));
            }
        }
        BinnedObservable::new(self.space.clone(), bins, effects)
    }
}

pub fn sequential_compose(first: &Instrument, second: &BinnedObservable) -> Result<JointObservable> {
    first.space.ensure_same(second.space())?;
    let effects = (0..first.len())
        .map(|i| {
            second
                .effects()
                .iter()
                .map(|f| {
                    let m = first.dual_apply(&[i], f)?;
                    Operator::symmetrized(first.space.clone(), m.into_matrix())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let joint = JointObservable {
        space: first.space.clone(),
        first_bins: first.bins.clone(),
        second_bins: second.bins().to_vec(),
        effects,
    };
    joint.as_binned()?;
    Ok(joint)
}

/// System–probe interaction.
#[derive(Debug, Clone)]
pub enum Coupling {
    /// A unitary on `system ⊗ probe`.
    Dense(Operator),
    /// `e^{-iλA⊗P}` for `A = Σ a Π_a`, acting on the system or, when a
    /// dilation is present, on the dilated system.
    Translation {
        branches: Vec<(f64, DMatrix<C64>)>,
        dilation: Option<NaimarkDilation>,
    },
}

/// Pointer observable read on the probe.
#[derive(Debug, Clone)]
pub enum Pointer {
    /// Sharp position, one bin per probe grid point.
    Position,
    /// Sharp momentum, one bin per probe momentum.
    Momentum,
    /// Any POVM on the probe space.
    Observable(BinnedObservable),
}

/// `⟨system, probe, coupling, pointer, λ⟩` with pointer function `x ↦ x/λ`.
#[derive(Debug, Clone)]
pub struct MeasurementScheme {
    system: Space,
    probe: WaveFunction,
    coupling: Coupling,
    pointer: Pointer,
    lambda: f64,
}

impl MeasurementScheme {
    pub fn new(system: Space, probe: WaveFunction, coupling: Coupling, pointer: Pointer, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !probe.is_normalized(1e-10) {
            return Err(Error::InvalidParameter { name: "probe", reason: "not normalized".into() });
        }
        match &pointer {
            Pointer::Position | Pointer::Momentum => {
                probe.space().require_grid()?;
            }
            Pointer::Observable(z) => z.space().ensure_same(probe.space())?,
        }
        match &coupling {
            Coupling::Dense(u) => {
                u.space().ensure_same(&system.tensor(probe.space()))?;
                let dev = u.unitarity_deviation();
                if dev > crate::operator::UNITARY_TOL {
                    return Err(Error::NotUnitary(dev));
                }
            }
            Coupling::Translation { branches, dilation } => {
                let grid = *probe.space().require_grid()?;
                let dim = match dilation {
                    Some(nd) => {
                        nd.system().ensure_same(&system)?;
                        nd.dilated_space().dim()
                    }
                    None => system.dim(),
                };
                let mut sum = DMatrix::<C64>::zeros(dim, dim);
                for (_, p) in branches {
                    if p.nrows() != dim || p.ncols() != dim {
                        return Err(Error::ShapeMismatch { expected: dim, found: p.nrows() });
                    }
                    sum += p;
                }
                let dev = linalg::max_abs_diff(&sum, &DMatrix::identity(dim, dim));
                if dev > 1e-9 {
                    return Err(Error::InvalidParameter { name: "branches", reason: format!("projections do not resolve I ({dev:.3e})") });
                }
                let spread = branches.iter().map(|(a, _)| a.abs()).fold(0.0, f64::max);
                check_probe_extent(&grid, &probe, lambda * spread)?;
            }
        }
        Ok(Self { system, probe, coupling, pointer, lambda })
    }

    pub fn system(&self) -> &Space {
        &self.system
    }

    pub fn probe(&self) -> &WaveFunction {
        &self.probe
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn pointer(&self) -> &Pointer {
        &self.pointer
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn probe_grid(&self) -> Option<GridSpec> {
        self.probe.space().as_grid().copied()
    }

    /// Pointer readings rescaled by the pointer function.
    pub fn outcome_bins(&self) -> Result<Vec<OutcomeBin>> {
        let raw: Vec<OutcomeBin> = match &self.pointer {
            Pointer::Position => crate::observables::position_bins(&self.probe_grid().unwrap()),
            Pointer::Momentum => crate::observables::momentum_bins(&self.probe_grid().unwrap()),
            Pointer::Observable(z) => z.bins().to_vec(),
        };
        raw.iter().map(|b| b.scaled(1.0 / self.lambda)).collect()
    }

    /// Orthonormal-basis vectors spanning each pointer effect, with their
    /// weights: `Z(X_i) = Σ_k c_k v_k v_k†`.
    fn pointer_components(&self, i: usize) -> Vec<(f64, DVector<C64>)> {
        let np = self.probe.dim();
        match &self.pointer {
            Pointer::Position => {
                let mut e = DVector::zeros(np);
                e[i] = C64::from(1.0);
                vec![(1.0, e)]
            }
            Pointer::Momentum => {
                let grid = self.probe_grid().unwrap();
                let mut e = DVector::zeros(np);
                e[i] = C64::from(1.0);
                vec![(1.0, fourier::inverse(&grid, &e))]
            }
            Pointer::Observable(z) => {
                let (values, vectors) = linalg::herm_eigen(z.effect(i).matrix());
                values
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v > 1e-14)
                    .map(|(c, v)| (*v, vectors.column(c).into_owned()))
                    .collect()
            }
        }
    }

    fn pointer_len(&self) -> usize {
        match &self.pointer {
            Pointer::Position | Pointer::Momentum => self.probe.dim(),
            Pointer::Observable(z) => z.len(),
        }
    }

    /// The coupling unitary on `(dilated) system ⊗ probe`, built explicitly.
    pub fn coupling_unitary(&self) -> Result<Operator> {
        match &self.coupling {
            Coupling::Dense(u) => Ok(u.clone()),
            Coupling::Translation { branches, dilation } => {
                let grid = self.probe_grid().unwrap();
                let n = grid.n();
                let space = match dilation {
                    Some(nd) => nd.dilated_space(),
                    None => self.system.clone(),
                };
                let ds = space.dim();
                let mut u = DMatrix::<C64>::zeros(ds * n, ds * n);
                for (a, p) in branches {
                    let shift = self.lambda * a;
                    let mut t = DMatrix::<C64>::zeros(n, n);
                    for k in 0..n {
                        let mut e = DVector::zeros(n);
                        e[k] = C64::from(1.0);
                        t.set_column(k, &fourier::translate(&grid, &e, shift));
                    }
                    u += linalg::kron(p, &t);
                }
                Operator::unitary(space.tensor(self.probe.space()), u)
            }
        }
    }

    /// `tr[U(ρ⊗σ)U† · I⊗Z(f^{-1}(X))]` by explicit evolution of the joint
    /// state. Independent of the Kraus construction; meant for small sizes.
    pub fn full_state_probability(&self, rho: &DensityOperator, indices: &[usize]) -> Result<f64> {
        self.system.ensure_same(rho.space())?;
        let u = self.coupling_unitary()?;
        let np = self.probe.dim();
        let sigma = self.probe.amps() * C64::from(self.probe.space().weight().sqrt());
        let ws = self.system.weight().sqrt();
        let mut reduced = DMatrix::<C64>::zeros(np, np);
        for (p, comp) in rho.components(1e-15) {
            let mut v = comp.amps() * C64::from(ws);
            if let Coupling::Translation { dilation: Some(nd), .. } = &self.coupling {
                v = nd.isometry() * v;
            }
            let psi = u.matrix() * linalg::kron_vec(&v, &sigma);
            let ds = psi.len() / np;
            for s in 0..ds {
                let block = psi.rows(s * np, np);
                reduced += &block * block.adjoint() * C64::from(p);
            }
        }
        let mut total = 0.0;
        for &i in indices {
            if i >= self.pointer_len() {
                return Err(Error::InvalidParameter { name: "outcome", reason: format!("index {i} out of range") });
            }
            for (c, v) in self.pointer_components(i) {
                total += c * linalg::sandwich(&v, &reduced, &v).re;
            }
        }
        Ok(total)
    }
}

fn check_probe_extent(grid: &GridSpec, probe: &WaveFunction, max_shift: f64) -> Result<()> {
    let q = position_operator(*grid);
    let mean = expectation(&q, probe)?.re;
    let second = probe.amps().iter().zip(grid.points()).map(|(a, x)| a.norm_sqr() * (x - mean).powi(2)).sum::<f64>() * grid.dx();
    let required = mean.abs() + max_shift + 5.0 * second.max(0.0).sqrt();
    let available = 0.5 * grid.length();
    if required > available {
        return Err(Error::ProbeTooSmall { required, available });
    }
    Ok(())
}

fn translation_branches(a: &Operator) -> Result<Vec<(f64, DMatrix<C64>)>> {
    Ok(a.spectral_projections(1e-9)?.into_iter().map(|(v, p)| (v, p.into_matrix())).collect())
}

fn dilated_branches(nd: &NaimarkDilation) -> Vec<(f64, DMatrix<C64>)> {
    nd.bins().iter().map(|b| b.center()).zip(nd.projections().iter().cloned()).collect()
}

/// Standard model for a sharp observable: coupling `e^{-iλA⊗P}`, position pointer.
pub fn standard_model(a: &Operator, probe: &WaveFunction, lambda: f64) -> Result<MeasurementScheme> {
    let coupling = Coupling::Translation { branches: translation_branches(a)?, dilation: None };
    MeasurementScheme::new(a.space().clone(), probe.clone(), coupling, Pointer::Position, lambda)
}

/// Standard model for a POVM through its square-root Naimark dilation.
pub fn standard_model_povm(e: &BinnedObservable, probe: &WaveFunction, lambda: f64) -> Result<MeasurementScheme> {
    standard_model_dilated(naimark_dilate(e)?, probe, lambda)
}

/// Standard model for a POVM through a given Naimark dilation.
pub fn standard_model_dilated(nd: NaimarkDilation, probe: &WaveFunction, lambda: f64) -> Result<MeasurementScheme> {
    let system = nd.system().clone();
    let coupling = Coupling::Translation { branches: dilated_branches(&nd), dilation: Some(nd) };
    MeasurementScheme::new(system, probe.clone(), coupling, Pointer::Position, lambda)
}

/// Same coupling as the standard model, momentum pointer.
pub fn boost_scheme(a: &Operator, probe: &WaveFunction, lambda: f64) -> Result<MeasurementScheme> {
    let coupling = Coupling::Translation { branches: translation_branches(a)?, dilation: None };
    MeasurementScheme::new(a.space().clone(), probe.clone(), coupling, Pointer::Momentum, lambda)
}

pub fn boost_scheme_povm(e: &BinnedObservable, probe: &WaveFunction, lambda: f64) -> Result<MeasurementScheme> {
    let nd = naimark_dilate(e)?;
    let system = nd.system().clone();
    let coupling = Coupling::Translation { branches: dilated_branches(&nd), dilation: Some(nd) };
    MeasurementScheme::new(system, probe.clone(), coupling, Pointer::Momentum, lambda)
}

/// The instrument a scheme determines.
pub fn instrument_from_scheme(s: &MeasurementScheme) -> Result<Instrument> {
    let bins = s.outcome_bins()?;
    let d = s.system.dim();
    let (kraus, weights): (Vec<Vec<DMatrix<C64>>>, Vec<f64>) = match &s.coupling {
        Coupling::Dense(u) => {
            let np = s.probe.dim();
            let sigma = s.probe.amps() * C64::from(s.probe.space().weight().sqrt());
            // M = U (I ⊗ |σ⟩), rows indexed (system, probe)
            let mut m = DMatrix::<C64>::zeros(d * np, d);
            for c in 0..d {
                for (beta, sb) in sigma.iter().enumerate() {
                    m.column_mut(c).axpy(*sb, &u.matrix().column(c * np + beta), C64::from(1.0));
                }
            }
            let kraus = (0..s.pointer_len())
                .map(|i| {
                    s.pointer_components(i)
                        .into_iter()
                        .map(|(c, v)| {
                            DMatrix::from_fn(d, d, |r, col| {
                                (0..np).map(|al| v[al].conj() * m[(r * np + al, col)]).sum::<C64>() * c.sqrt()
                            })
                        })
                        .collect()
                })
                .collect();
            (kraus, vec![1.0; bins.len()])
        }
        Coupling::Translation { branches, dilation } => {
            let grid = s.probe_grid().unwrap();
            let (coeffs, weight): (Vec<Vec<C64>>, f64) = match &s.pointer {
                Pointer::Position => {
                    let shifted: Vec<DVector<C64>> =
                        branches.iter().map(|(a, _)| fourier::translate(&grid, s.probe.amps(), s.lambda * a)).collect();
                    ((0..grid.n()).map(|j| shifted.iter().map(|t| t[j]).collect()).collect(), grid.dx())
                }
                Pointer::Momentum => {
                    let hat = fourier::momentum_amplitudes(&grid, s.probe.amps());
                    (
                        (0..grid.n())
                            .map(|m| {
                                branches
                                    .iter()
                                    .map(|(a, _)| hat[m] * C64::from_polar(1.0, -s.lambda * a * grid.p(m)))
                                    .collect()
                            })
                            .collect(),
                        grid.dp(),
                    )
                }
                Pointer::Observable(_) => {
                    let root = grid.dx().sqrt();
                    let shifted: Vec<DVector<C64>> = branches
                        .iter()
                        .map(|(a, _)| fourier::translate(&grid, s.probe.amps(), s.lambda * a) * C64::from(root))
                        .collect();
                    // one Kraus operator per eigencomponent of each pointer effect
                    let mut rows = Vec::new();
                    let mut owner = Vec::new();
                    for i in 0..s.pointer_len() {
                        for (c, v) in s.pointer_components(i) {
                            rows.push(shifted.iter().map(|t| v.dotc(t) * c.sqrt()).collect::<Vec<_>>());
                            owner.push(i);
                        }
                    }
                    let mut per_bin: Vec<Vec<DMatrix<C64>>> = vec![Vec::new(); s.pointer_len()];
                    for (row, i) in rows.into_iter().zip(owner) {
                        per_bin[i].extend(branch_kraus(branches, dilation.as_ref(), &row));
                    }
                    let n = per_bin.len();
                    return Instrument::new(s.system.clone(), bins, per_bin, vec![1.0; n]);
                }
            };
            let kraus = coeffs.iter().map(|row| branch_kraus(branches, dilation.as_ref(), row)).collect();
            (kraus, vec![weight; bins.len()])
        }
    };
    Instrument::new(s.system.clone(), bins, kraus, weights)
}

/// `Σ_a c_a Π_a`, compressed through the dilation when there is one.
fn branch_kraus(branches: &[(f64, DMatrix<C64>)], dilation: Option<&NaimarkDilation>, coeffs: &[C64]) -> Vec<DMatrix<C64>> {
    let dim = branches[0].1.nrows();
    let mut k = DMatrix::<C64>::zeros(dim, dim);
    for ((_, p), c) in branches.iter().zip(coeffs) {
        if *c != C64::from(0.0) {
            k += p * *c;
        }
    }
    match dilation {
        None => vec![k],
        Some(nd) => {
            let kv = k * nd.isometry();
            (0..nd.ancilla_dim()).map(|beta| linalg::contract_right_row(&kv, nd.ancilla_dim(), beta)).collect()
        }
    }
}

/// The observable measured by a scheme.
pub fn measured_observable(s: &MeasurementScheme) -> Result<BinnedObservable> {
    instrument_from_scheme(s)?.measured_observable()
}

/// `K_x = √λ φ(−λ(A − x))`, evaluated in the eigenbasis of `A` by
/// band-limited interpolation of the probe.
pub fn standard_model_kraus(a: &Operator, probe: &WaveFunction, lambda: f64, x: f64) -> Result<Operator> {
    check_lambda(lambda)?;
    let grid = *probe.space().require_grid()?;
    let coeffs = fourier::forward(&grid, probe.amps());
    let branches = translation_branches(a)?;
    Ok(kraus_at(&grid, &coeffs, &branches, a.space(), lambda, x))
}

fn kraus_at(grid: &GridSpec, coeffs: &DVector<C64>, branches: &[(f64, DMatrix<C64>)], space: &Space, lambda: f64, x: f64) -> Operator {
    let d = space.dim();
    let mut k = DMatrix::<C64>::zeros(d, d);
    for (a, p) in branches {
        let v = fourier::interpolate_from_coeffs(grid, coeffs, -lambda * (a - x));
        k += p * (v * lambda.sqrt());
    }
    Operator::general(space.clone(), k).expect("shape follows the space")
}

/// Instrument from `{K_x}` sampled at bin centres with the bin widths as
/// quadrature weights.
pub fn standard_model_kraus_instrument(a: &Operator, probe: &WaveFunction, lambda: f64, bins: Vec<OutcomeBin>) -> Result<Instrument> {
    check_lambda(lambda)?;
    let grid = *probe.space().require_grid()?;
    let coeffs = fourier::forward(&grid, probe.amps());
    let branches = translation_branches(a)?;
    let kraus = bins.iter().map(|b| vec![kraus_at(&grid, &coeffs, &branches, a.space(), lambda, b.center()).into_matrix()]).collect();
    let weights = bins.iter().map(OutcomeBin::width).collect();
    let instr = Instrument::unchecked(a.space().clone(), bins, kraus, weights)?;
    let dev = instr.closure_deviation();
    if dev > RESOLUTION_TOL {
        return Err(Error::PointerUnderresolved(dev));
    }
    if dev > CLOSURE_TOL {
        log::warn!("sampled Kraus family closes only within {dev:.3e}");
    }
    Ok(instr)
}
