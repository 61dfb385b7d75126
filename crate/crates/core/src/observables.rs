//! Finite-outcome observables: binned POVMs, probability measures on bins,
//! smearing by convolution, first moments, supports and Naimark dilations.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::GridSpec;
use crate::linalg;
use crate::operator::{OpKind, Operator};
use crate::space::Space;
use crate::state::{QuantumState, WaveFunction};

pub const EFFECT_TOL: f64 = 1e-10;
pub const CLOSURE_TOL: f64 = 1e-9;
pub const PROBABILITY_TOL: f64 = 1e-10;

/// Half-open outcome interval `[lo, hi)`. Serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct OutcomeBin {
    lo: f64,
    hi: f64,
}

impl TryFrom<[f64; 2]> for OutcomeBin {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        OutcomeBin::new(v[0], v[1])
    }
}

impl From<OutcomeBin> for [f64; 2] {
    fn from(b: OutcomeBin) -> Self {
        [b.lo, b.hi]
    }
}

impl OutcomeBin {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter { name: "bin", reason: format!("[{lo}, {hi}) is empty") });
        }
        Ok(Self { lo, hi })
    }

    /// Bin of the given width centred on a label.
    pub fn around(center: f64, width: f64) -> Result<Self> {
        Self::new(center - 0.5 * width, center + 0.5 * width)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Membership with a relative guard so that lattice points sitting on an
    /// edge land in the bin to their right despite roundoff.
    pub fn contains(&self, x: f64) -> bool {
        let g = 1e-9 * self.width();
        x >= self.lo - g && x < self.hi - g
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        let (a, b) = (self.lo * s, self.hi * s);
        Self::new(a.min(b), a.max(b))
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self { lo: self.lo + by, hi: self.hi + by }
    }
}

/// `count` equal bins tiling `[lo, hi)`.
pub fn uniform_bins(lo: f64, hi: f64, count: usize) -> Result<Vec<OutcomeBin>> {
    if count == 0 {
        return Err(Error::InvalidParameter { name: "count", reason: "no bins".into() });
    }
    let w = (hi - lo) / count as f64;
    (0..count).map(|i| OutcomeBin::new(lo + i as f64 * w, lo + (i + 1) as f64 * w)).collect()
}

/// One bin per grid point, centred on the point.
pub fn position_bins(grid: &GridSpec) -> Vec<OutcomeBin> {
    grid.points().iter().map(|&x| OutcomeBin::around(x, grid.dx()).unwrap()).collect()
}

/// One bin per momentum lattice point.
pub fn momentum_bins(grid: &GridSpec) -> Vec<OutcomeBin> {
    grid.momenta().iter().map(|&p| OutcomeBin::around(p, grid.dp()).unwrap()).collect()
}

/// Bins of common width centred on sorted discrete labels; the width is the
/// smallest label gap (1 for a single label).
pub fn label_bins(labels: &[f64]) -> Result<Vec<OutcomeBin>> {
    let mut sorted = labels.to_vec();
    sorted.sort_by(f64::total_cmp);
    let width = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if width <= 0.0 {
        return Err(Error::InvalidParameter { name: "labels", reason: "duplicate labels".into() });
    }
    let width = if width.is_finite() { width } else { 1.0 };
    sorted.iter().map(|&c| OutcomeBin::around(c, width)).collect()
}

fn check_bins(bins: &[OutcomeBin]) -> Result<()> {
    for w in bins.windows(2) {
        if w[1].lo < w[0].hi - 1e-12 * w[0].width().max(1.0) {
            return Err(Error::InvalidObservable(format!(
                "bins [{}, {}) and [{}, {}) overlap or are unordered",
                w[0].lo, w[0].hi, w[1].lo, w[1].hi
            )));
        }
    }
    Ok(())
}

fn is_diagonal(m: &DMatrix<C64>) -> bool {
    (0..m.ncols()).all(|c| (0..m.nrows()).all(|r| r == c || m[(r, c)] == C64::from(0.0)))
}

/// Eigenvalues of an effect, with a fast path for diagonal matrices.
fn effect_spectrum(m: &DMatrix<C64>) -> Vec<f64> {
    if is_diagonal(m) {
        let mut v: Vec<f64> = m.diagonal().iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        v
    } else {
        linalg::herm_eigenvalues(m)
    }
}

/// A finite-outcome POVM: ordered disjoint bins and positive effects summing
/// to the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawObservable", into = "RawObservable")]
pub struct BinnedObservable {
    space: Space,
    bins: Vec<OutcomeBin>,
    effects: Vec<Operator>,
}

impl BinnedObservable {
    pub fn new(space: Space, bins: Vec<OutcomeBin>, effects: Vec<DMatrix<C64>>) -> Result<Self> {
        if bins.len() != effects.len() {
            return Err(Error::ShapeMismatch { expected: bins.len(), found: effects.len() });
        }
        if bins.is_empty() {
            return Err(Error::InvalidObservable("no outcomes".into()));
        }
        check_bins(&bins)?;
        let d = space.dim();
        let mut sum = DMatrix::<C64>::zeros(d, d);
        let mut ops = Vec::with_capacity(effects.len());
        for (bin, m) in bins.iter().zip(effects) {
            let op = Operator::hermitian(space.clone(), m)
                .map_err(|e| Error::InvalidObservable(format!("effect at {}: {e}", bin.center())))?;
            let spec = effect_spectrum(op.matrix());
            let (lo, hi) = (spec[0], spec[spec.len() - 1]);
            if lo < -EFFECT_TOL || hi > 1.0 + EFFECT_TOL {
                return Err(Error::InvalidObservable(format!(
                    "effect at {} has spectrum [{lo:.3e}, {hi:.3e}] outside [0, 1]",
                    bin.center()
                )));
            }
            sum += op.matrix();
            ops.push(op);
        }
        let dev = linalg::max_abs_diff(&sum, &DMatrix::identity(d, d));
        if dev > CLOSURE_TOL {
            return Err(Error::InvalidObservable(format!("effects sum to identity only within {dev:.3e}")));
        }
        Ok(Self { space, bins, effects: ops })
    }

    /// Single-outcome observable `{I}`.
    pub fn trivial(space: Space, bin: OutcomeBin) -> Self {
        Self { effects: vec![Operator::identity(space.clone())], space, bins: vec![bin] }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn bins(&self) -> &[OutcomeBin] {
        &self.bins
    }

    pub fn effects(&self) -> &[Operator] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bins.iter().map(OutcomeBin::center).collect()
    }

    pub fn effect(&self, i: usize) -> &Operator {
        &self.effects[i]
    }

    /// `E(Y)` for a set of outcome indices.
    pub fn effect_of(&self, indices: &[usize]) -> Result<Operator> {
        let d = self.space.dim();
        let mut m = DMatrix::zeros(d, d);
        for &i in indices {
            let e = self
                .effects
                .get(i)
                .ok_or_else(|| Error::InvalidParameter { name: "outcome", reason: format!("index {i} out of range") })?;
            m += e.matrix();
        }
        Operator::hermitian(self.space.clone(), m)
    }

    /// Indices of the bins whose centres fall in `[lo, hi)`.
    pub fn indices_in(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| {
            let c = self.bins[i].center();
            c >= lo && c < hi
        }).collect()
    }

    /// Max-norm distance between corresponding effects; infinite when the
    /// outcome sets differ.
    pub fn distance(&self, other: &BinnedObservable) -> f64 {
        if self.len() != other.len() || self.space != other.space {
            return f64::INFINITY;
        }
        let bins_match = self.bins.iter().zip(&other.bins).all(|(a, b)| {
            (a.center() - b.center()).abs() <= 1e-9 * a.width().max(b.width())
        });
        if !bins_match {
            return f64::INFINITY;
        }
        self.effects.iter().zip(&other.effects).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }

    pub fn is_projective(&self, tol: f64) -> bool {
        self.effects.iter().all(|e| e.is_projection(tol))
    }
}

#[derive(Serialize, Deserialize)]
struct RawMatrix(#[serde(with = "crate::serialize::complex_matrix")] DMatrix<C64>);

#[derive(Serialize, Deserialize)]
struct RawObservable {
    space: Space,
    bins: Vec<OutcomeBin>,
    effects: Vec<RawMatrix>,
}

impl TryFrom<RawObservable> for BinnedObservable {
    type Error = Error;
    fn try_from(raw: RawObservable) -> Result<Self> {
        BinnedObservable::new(raw.space, raw.bins, raw.effects.into_iter().map(|m| m.0).collect())
    }
}

impl From<BinnedObservable> for RawObservable {
    fn from(o: BinnedObservable) -> Self {
        RawObservable {
            space: o.space,
            bins: o.bins,
            effects: o.effects.into_iter().map(|e| RawMatrix(e.into_matrix())).collect(),
        }
    }
}

/// A probability vector over ordered bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityMeasure {
    bins: Vec<OutcomeBin>,
    weights: Vec<f64>,
}

impl ProbabilityMeasure {
    pub fn new(bins: Vec<OutcomeBin>, weights: Vec<f64>) -> Result<Self> {
        if bins.len() != weights.len() {
            return Err(Error::ShapeMismatch { expected: bins.len(), found: weights.len() });
        }
        check_bins(&bins)?;
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::InvalidParameter { name: "weights", reason: format!("negative weight {w}") });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidParameter { name: "weights", reason: format!("sum {total} ≠ 1") });
        }
        Ok(Self { bins, weights })
    }

    /// Nonnegative weights rescaled to unit total.
    pub fn normalized(bins: Vec<OutcomeBin>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter { name: "weights", reason: "zero total mass".into() });
        }
        Self::new(bins, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn point_mass(center: f64, width: f64) -> Result<Self> {
        Self::new(vec![OutcomeBin::around(center, width)?], vec![1.0])
    }

    /// `μ^λ(X) = ⟨φ|P^Q(λX)φ⟩` binned on the probe grid: one bin per probe
    /// point `y_j`, centred at `y_j/λ` with width `dy/λ`.
    pub fn probe_position(probe: &WaveFunction, lambda: f64) -> Result<Self> {
        let grid = *probe.space().require_grid()?;
        check_lambda(lambda)?;
        let bins = grid.points().iter().map(|&y| OutcomeBin::around(y / lambda, grid.dx() / lambda)).collect::<Result<_>>()?;
        let weights = probe.amps().iter().map(|a| a.norm_sqr() * grid.dx()).collect();
        Self::normalized(bins, weights)
    }

    /// `μ̂^λ(X) = ⟨φ̂|P(λX)φ̂⟩` binned on the probe's momentum lattice.
    pub fn probe_momentum(probe: &WaveFunction, lambda: f64) -> Result<Self> {
        let grid = *probe.space().require_grid()?;
        check_lambda(lambda)?;
        let bins = grid.momenta().iter().map(|&p| OutcomeBin::around(p / lambda, grid.dp() / lambda)).collect::<Result<_>>()?;
        let hat = fourier::momentum_amplitudes(&grid, probe.amps());
        let weights = hat.iter().map(|a| a.norm_sqr() * grid.dp()).collect();
        Self::normalized(bins, weights)
    }

    pub fn bins(&self) -> &[OutcomeBin] {
        &self.bins
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

    /// `μ[1] = Σ c_i μ_i`.
    pub fn mean(&self) -> f64 {
        self.bins.iter().zip(&self.weights).map(|(b, w)| b.center() * w).sum()
    }

    /// Total mass in bins whose centres fall in `[lo, hi)`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        self.bins
            .iter()
            .zip(&self.weights)
            .filter(|(b, _)| b.center() >= lo && b.center() < hi)
            .map(|(_, w)| w)
            .sum()
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter { name: "lambda", reason: format!("{lambda} must be positive") });
    }
    Ok(())
}

/// Spectral measure of a hermitian operator, binned.
pub fn sharp_observable(op: &Operator, bins: Vec<OutcomeBin>) -> Result<BinnedObservable> {
    if op.kind() != OpKind::Hermitian {
        let dev = op.hermiticity_deviation();
        if dev > crate::operator::HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
    }
    check_bins(&bins)?;
    let d = op.dim();
    let mut effects = vec![DMatrix::<C64>::zeros(d, d); bins.len()];
    let locate = |v: f64| bins.iter().position(|b| b.contains(v)).ok_or(Error::StrayEigenvalue(v));
    if is_diagonal(op.matrix()) {
        for k in 0..d {
            let i = locate(op.matrix()[(k, k)].re)?;
            effects[i][(k, k)] = C64::from(1.0);
        }
    } else {
        for (value, proj) in op.spectral_projections(1e-9)? {
            let i = locate(value)?;
            effects[i] += proj.matrix();
        }
    }
    BinnedObservable::new(op.space().clone(), bins, effects)
}

/// `{I − Q_i, Q_i}` with labels `{0, 1}` for `Q_i = P^Q(interval)`.
pub fn two_valued_position(grid: GridSpec, interval: OutcomeBin) -> Result<BinnedObservable> {
    let q = interval_projection(&grid, interval)?;
    let ident = Operator::identity(Space::Grid(grid));
    let complement = ident.matrix() - q.matrix();
    BinnedObservable::new(Space::Grid(grid), label_bins(&[0.0, 1.0])?, vec![complement, q.into_matrix()])
}

/// Diagonal projection onto the grid points inside the interval.
pub fn interval_projection(grid: &GridSpec, interval: OutcomeBin) -> Result<Operator> {
    let diag: Vec<f64> = grid.points().iter().map(|&x| if interval.contains(x) { 1.0 } else { 0.0 }).collect();
    if diag.iter().all(|&v| v == 0.0) {
        return Err(Error::EmptyInterval { lo: interval.lo(), hi: interval.hi() });
    }
    Operator::diagonal(Space::Grid(*grid), diag)
}

/// Outcome statistics `tr[ρE(X_i)]`.
pub fn statistics<S: QuantumState + ?Sized>(e: &BinnedObservable, state: &S) -> Result<ProbabilityMeasure> {
    e.space.ensure_same(state.space())?;
    let mut weights = Vec::with_capacity(e.len());
    for eff in &e.effects {
        let w = state.expectation(eff)?.re;
        if w < -1e-12 {
            return Err(Error::InvalidObservable(format!("negative probability {w:.3e}")));
        }
        weights.push(w.max(0.0));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() >= CLOSURE_TOL {
        return Err(Error::InvalidObservable(format!("statistics sum to {total}")));
    }
    ProbabilityMeasure::new(e.bins.clone(), weights.into_iter().map(|w| w / total).collect())
}

/// `(μ∗E)(Z) = Σ_i μ(Z − c_i) E(X_i)`.
///
/// With a single-bin μ the result keeps E's bins, shifted by μ's centre.
/// Otherwise the result lives on the lattice of μ's bin width, which must be
/// commensurate with the differences of E's centres.
pub fn convolve(mu: &ProbabilityMeasure, e: &BinnedObservable) -> Result<BinnedObservable> {
    convolve_impl(mu, e, None)
}

/// As [`convolve`], keeping only outcomes with centres in `[lo, hi)`. More
/// than `1e-9` of dropped mass is an error.
pub fn convolve_within(mu: &ProbabilityMeasure, e: &BinnedObservable, lo: f64, hi: f64) -> Result<BinnedObservable> {
    convolve_impl(mu, e, Some((lo, hi)))
}

fn convolve_impl(mu: &ProbabilityMeasure, e: &BinnedObservable, range: Option<(f64, f64)>) -> Result<BinnedObservable> {
    let d = e.space.dim();
    let (bins, effects): (Vec<OutcomeBin>, Vec<DMatrix<C64>>) = if mu.len() == 1 {
        let c = mu.bins[0].center();
        (
            e.bins.iter().map(|b| b.shifted(c)).collect(),
            e.effects.iter().map(|op| op.matrix().clone()).collect(),
        )
    } else {
        let w = mu.bins[0].width();
        if mu.bins.iter().any(|b| (b.width() - w).abs() > 1e-9 * w) {
            return Err(Error::Incommensurate("smearing measure bins have unequal widths".into()));
        }
        let origin = mu.bins[0].center() + e.bins[0].center();
        let index = |z: f64| -> Result<i64> {
            let t = (z - origin) / w;
            let k = t.round();
            if (t - k).abs() > 1e-6 {
                return Err(Error::Incommensurate(format!("outcome {z} is off the lattice of width {w}")));
            }
            Ok(k as i64)
        };
        let mut cells: std::collections::BTreeMap<i64, DMatrix<C64>> = Default::default();
        for (bj, &mj) in mu.bins.iter().zip(&mu.weights) {
            if mj == 0.0 {
                continue;
            }
            for (bi, ei) in e.bins.iter().zip(&e.effects) {
                let k = index(bj.center() + bi.center())?;
                let cell = cells.entry(k).or_insert_with(|| DMatrix::zeros(d, d));
                *cell += ei.matrix() * C64::from(mj);
            }
        }
        cells
            .into_iter()
            .map(|(k, m)| (OutcomeBin::around(origin + k as f64 * w, w).unwrap(), m))
            .unzip()
    };
    let (bins, mut effects) = match range {
        None => (bins, effects),
        Some((lo, hi)) => {
            let mut kept_bins = Vec::new();
            let mut kept = Vec::new();
            let mut dropped = DMatrix::<C64>::zeros(d, d);
            for (b, m) in bins.into_iter().zip(effects) {
                if b.center() >= lo && b.center() < hi {
                    kept_bins.push(b);
                    kept.push(m);
                } else {
                    dropped += m;
                }
            }
            let lost = linalg::herm_eigenvalues(&dropped).last().copied().unwrap_or(0.0);
            if lost > 1e-9 {
                return Err(Error::OutcomeRangeExceeded(lost));
            }
            if kept.is_empty() {
                return Err(Error::OutcomeRangeExceeded(1.0));
            }
            (kept_bins, kept)
        }
    };
    for m in &mut effects {
        *m = linalg::hermitian_part(m);
    }
    BinnedObservable::new(e.space.clone(), bins, effects)
}

/// `E[1] = Σ_i c_i E(X_i)`.
pub fn first_moment(e: &BinnedObservable) -> Operator {
    let d = e.space.dim();
    let mut m = DMatrix::<C64>::zeros(d, d);
    for (b, op) in e.bins.iter().zip(&e.effects) {
        m += op.matrix() * C64::from(b.center());
    }
    Operator::symmetrized(e.space.clone(), m).expect("sum of hermitian effects")
}

/// Bins whose effect has operator norm above `threshold`.
pub fn support(e: &BinnedObservable, threshold: f64) -> Result<Vec<OutcomeBin>> {
    if !(threshold > 0.0 && threshold <= 1e-3) {
        return Err(Error::InvalidParameter { name: "threshold", reason: format!("{threshold} not in (0, 1e-3]") });
    }
    Ok(e.bins
        .iter()
        .zip(&e.effects)
        .filter(|(_, op)| effect_spectrum(op.matrix()).last().copied().unwrap_or(0.0) > threshold)
        .map(|(b, _)| *b)
        .collect())
}

pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-10;

/// A Naimark dilation `(V, A)` of a finite POVM: `V` is an isometry from the
/// system into `system ⊗ C^m` and `A` a sharp observable there with
/// `V† P^A(X_i) V = E(X_i)`.
#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    system: Space,
    ancilla_dim: usize,
    isometry: DMatrix<C64>,
    bins: Vec<OutcomeBin>,
    projections: Vec<DMatrix<C64>>,
}

/// Square-root dilation `Vφ = Σ_i (E(X_i)^{1/2} φ) ⊗ |i⟩`.
pub fn naimark_dilate(povm: &BinnedObservable) -> Result<NaimarkDilation> {
    let m = povm.len();
    if m < 2 {
        return Err(Error::InvalidObservable("dilation needs at least two outcomes".into()));
    }
    let d = povm.space.dim();
    let mut v = DMatrix::<C64>::zeros(d * m, d);
    for (i, e) in povm.effects.iter().enumerate() {
        let root = linalg::psd_sqrt(e.matrix(), EFFECT_TOL)?;
        for s in 0..d {
            for c in 0..d {
                v[(s * m + i, c)] = root[(s, c)];
            }
        }
    }
    let projections = (0..m)
        .map(|i| {
            let mut ket = DMatrix::<C64>::zeros(m, m);
            ket[(i, i)] = C64::from(1.0);
            linalg::kron(&DMatrix::identity(d, d), &ket)
        })
        .collect();
    Ok(NaimarkDilation { system: povm.space.clone(), ancilla_dim: m, isometry: v, bins: povm.bins.clone(), projections })
}

impl NaimarkDilation {
    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn system(&self) -> &Space {
        &self.system
    }

    pub fn dilated_space(&self) -> Space {
        self.system.tensor(&Space::finite(self.ancilla_dim))
    }

    pub fn isometry(&self) -> &DMatrix<C64> {
        &self.isometry
    }

    pub fn bins(&self) -> &[OutcomeBin] {
        &self.bins
    }

    /// Spectral projections `P^A(X_i)` on the dilated space.
    pub fn projections(&self) -> &[DMatrix<C64>] {
        &self.projections
    }

    /// `A = Σ_i c_i P^A(X_i)`.
    pub fn sharp_observable(&self) -> Operator {
        let dim = self.isometry.nrows();
        let mut a = DMatrix::<C64>::zeros(dim, dim);
        for (b, p) in self.bins.iter().zip(&self.projections) {
            a += p * C64::from(b.center());
        }
        Operator::symmetrized(self.dilated_space(), a).expect("real combination of projections")
    }

    /// `V† B V` for an operator on the dilated space.
    pub fn compress(&self, b: &DMatrix<C64>) -> DMatrix<C64> {
        self.isometry.adjoint() * b * &self.isometry
    }

    /// Another dilation of the same POVM: `(I⊗R)V` with `A` conjugated by `I⊗R`.
    pub fn rotate_ancilla(&self, r: &DMatrix<C64>) -> Result<NaimarkDilation> {
        let m = self.ancilla_dim;
        if r.nrows() != m || r.ncols() != m {
            return Err(Error::ShapeMismatch { expected: m, found: r.nrows() });
        }
        let dev = linalg::max_abs_diff(&(r.adjoint() * r), &DMatrix::identity(m, m));
        if dev > crate::operator::UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        let u = linalg::kron(&DMatrix::identity(self.system.dim(), self.system.dim()), r);
        Ok(NaimarkDilation {
            system: self.system.clone(),
            ancilla_dim: m,
            isometry: &u * &self.isometry,
            bins: self.bins.clone(),
            projections: self.projections.iter().map(|p| &u * p * u.adjoint()).collect(),
        })
    }

    /// Largest deviation from `V†V = I` and from `V† P^A(X_i) V = E(X_i)`.
    pub fn verify(&self, povm: &BinnedObservable) -> (f64, f64) {
        let d = self.system.dim();
        let iso = linalg::max_abs_diff(&(self.isometry.adjoint() * &self.isometry), &DMatrix::identity(d, d));
        let eff = self
            .projections
            .iter()
            .zip(povm.effects())
            .map(|(p, e)| linalg::max_abs_diff(&self.compress(p), e.matrix()))
            .fold(0.0, f64::max);
        (iso, eff)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{momentum_operator, position_operator, qubit_ops};
    use crate::state::{expectation, gaussian_state};

    #[test]
    fn sharp_position_is_diagonal_rank_one() {
        let g = GridSpec::new(16, 16.0).unwrap();
        let e = sharp_observable(&position_operator(g), position_bins(&g)).unwrap();
        assert_eq!(e.len(), 16);
        for (k, eff) in e.effects().iter().enumerate() {
            assert_eq!(eff.matrix()[(k, k)], C64::from(1.0));
            assert!((eff.matrix().iter().map(|z| z.norm()).sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert!(first_moment(&e).distance(&position_operator(g)) < 1e-12);
    }

    #[test]
    fn sharp_sigma_y_and_momentum() {
        let ops = qubit_ops();
        let e = sharp_observable(&ops.sigma_y, uniform_bins(-2.0, 2.0, 2).unwrap()).unwrap();
        assert!(e.is_projective(1e-12));
        let g = GridSpec::new(256, 32.0).unwrap();
        let pmax = g.p_max();
        let e = sharp_observable(&momentum_operator(g), uniform_bins(-pmax, pmax, 64).unwrap()).unwrap();
        assert!(e.is_projective(1e-8));
        let boosted = gaussian_state(g, 1.0, 0.0, 2.0).unwrap();
        let stats = statistics(&e, &boosted).unwrap();
        let argmax = (0..64).max_by(|&a, &b| stats.weights()[a].total_cmp(&stats.weights()[b])).unwrap();
        assert!(stats.bins()[argmax].contains(2.0));
    }

    #[test]
    fn stray_eigenvalue_is_reported() {
        let ops = qubit_ops();
        let err = sharp_observable(&ops.sigma_z, vec![OutcomeBin::new(0.0, 2.0).unwrap()]).unwrap_err();
        assert_eq!(err, Error::StrayEigenvalue(-1.0));
    }

    #[test]
    fn two_valued_position_cases() {
        let g = GridSpec::new(16, 16.0).unwrap();
        let whole = two_valued_position(g, OutcomeBin::new(-8.0, 8.0).unwrap()).unwrap();
        assert!(whole.effect(1).distance(&Operator::identity(Space::Grid(g))) < 1e-15);
        let single = two_valued_position(g, OutcomeBin::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(single.effect(1).matrix()[(8, 8)], C64::from(1.0));
        assert!((linalg::trace(single.effect(1).matrix()).re - 1.0).abs() < 1e-15);
        assert!(two_valued_position(g, OutcomeBin::new(20.0, 21.0).unwrap()).is_err());
        assert!(first_moment(&single).distance(single.effect(1)) < 1e-15);

        // interval edges on grid points
        let g = GridSpec::new(256, 32.0).unwrap();
        let phi = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
        let e = two_valued_position(g, OutcomeBin::new(-1.0, 1.0).unwrap()).unwrap();
        // ∫_{-1}^{1} normal density = erf(1/√2)
        let mass = expectation(e.effect(1), &phi).unwrap().re;
        assert!((mass - 0.682_689_492_137_086).abs() < 2e-3);
    }

    #[test]
    fn statistics_of_trivial_and_symmetric() {
        let g = GridSpec::new(64, 16.0).unwrap();
        let phi = gaussian_state(g, 1.0, 0.0, 0.0).unwrap();
        let triv = BinnedObservable::trivial(Space::Grid(g), OutcomeBin::new(0.0, 1.0).unwrap());
        assert_eq!(statistics(&triv, &phi).unwrap().weights(), &[1.0]);
        let e = sharp_observable(&position_operator(g), position_bins(&g)).unwrap();
        let w = statistics(&e, &phi).unwrap();
        for k in 1..32 {
            assert!((w.weights()[32 - k] - w.weights()[32 + k]).abs() < 1e-9);
        }
    }

    #[test]
    fn convolution_identities() {
        let ops = qubit_ops();
        let e = sharp_observable(&ops.sigma_z, label_bins(&[-1.0, 1.0]).unwrap()).unwrap();
        let delta = ProbabilityMeasure::point_mass(0.0, 0.5).unwrap();
        assert!(convolve(&delta, &e).unwrap().distance(&e) < 1e-12);
        assert_eq!(support(&convolve(&delta, &e).unwrap(), 1e-10).unwrap().len(), 2);

        let bins = uniform_bins(-1.25, 1.25, 5).unwrap();
        let mu = ProbabilityMeasure::new(bins, vec![0.1, 0.2, 0.4, 0.2, 0.1]).unwrap();
        let s = convolve(&mu, &e).unwrap();
        let supp = support(&s, 1e-10).unwrap();
        // ±1 shifted by five offsets; the two copies meet at 0
        assert_eq!(supp.len(), 9);
        for c in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            assert!(supp.iter().any(|b| b.contains(1.0 + c)));
            assert!(supp.iter().any(|b| b.contains(-1.0 + c)));
        }
        let lhs = first_moment(&s);
        assert!(lhs.distance(&first_moment(&e)) < 1e-8);
        let shifted = ProbabilityMeasure::new(uniform_bins(-0.25, 0.75, 2).unwrap(), vec![0.3, 0.7]).unwrap();
        let m1 = first_moment(&convolve(&shifted, &e).unwrap());
        let oracle = first_moment(&e).add(&Operator::identity(Space::Qubit).scale(shifted.mean())).unwrap();
        assert!(m1.distance(&oracle) < 1e-8);
        assert!(convolve_within(&mu, &e, -1.2, 1.2).is_err());
        assert!(convolve_within(&mu, &e, -3.0, 3.0).is_ok());
    }

    #[test]
    fn incommensurate_lattices_rejected() {
        let ops = qubit_ops();
        let e = sharp_observable(&ops.sigma_z, label_bins(&[-1.0, 1.0]).unwrap()).unwrap();
        let mu = ProbabilityMeasure::new(uniform_bins(-0.45, 0.45, 3).unwrap(), vec![0.2, 0.6, 0.2]).unwrap();
        assert!(matches!(convolve(&mu, &e), Err(Error::Incommensurate(_))));
    }

    #[test]
    fn naimark_round_trip() {
        let ops = qubit_ops();
        let e = sharp_observable(&ops.sigma_x, label_bins(&[-1.0, 1.0]).unwrap()).unwrap();
        let nd = naimark_dilate(&e).unwrap();
        let (iso, eff) = nd.verify(&e);
        assert!(iso < 1e-10 && eff < 1e-10);
        let half = DMatrix::identity(2, 2) * C64::from(0.5);
        let triv = BinnedObservable::new(Space::Qubit, label_bins(&[0.0, 1.0]).unwrap(), vec![half.clone(), half]).unwrap();
        let nd = naimark_dilate(&triv).unwrap();
        let a = nd.compress(nd.sharp_observable().matrix());
        assert!(linalg::max_abs_diff(&a, first_moment(&triv).matrix()) < 1e-10);

        let g = GridSpec::new(64, 16.0).unwrap();
        let sharp = sharp_observable(&position_operator(g), uniform_bins(-8.0, 8.0, 3).unwrap()).unwrap();
        // column-stochastic confusion matrix smearing three sharp outcomes
        let t = [[0.8, 0.15, 0.05], [0.15, 0.7, 0.15], [0.05, 0.15, 0.8]];
        let effects = (0..3)
            .map(|i| (0..3).fold(DMatrix::zeros(64, 64), |acc, j| acc + sharp.effect(j).matrix() * C64::from(t[i][j])))
            .collect();
        let smeared = BinnedObservable::new(Space::Grid(g), sharp.bins().to_vec(), effects).unwrap();
        let nd = naimark_dilate(&smeared).unwrap();
        let (iso, eff) = nd.verify(&smeared);
        assert!(iso < 1e-9 && eff < 1e-9);
        let a = nd.compress(nd.sharp_observable().matrix());
        assert!(linalg::max_abs_diff(&a, first_moment(&smeared).matrix()) < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let ops = qubit_ops();
        let e = sharp_observable(&ops.sigma_y, uniform_bins(-2.0, 2.0, 2).unwrap()).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains("\"bins\":[[-2.0,0.0],[0.0,2.0]]"));
        let back: BinnedObservable = serde_json::from_str(&s).unwrap();
        assert!(back.distance(&e) < 1e-15);
    }
}
