//! Generalized weak values and their recovery from postselected pointer
//! averages in the zero-coupling limit.
//!
//! For a preselected vector `φ`, a weakly measured observable `E` and a
//! postselection effect `F(Y)` the weak value is
//!
//! ```text
//! E_w = ⟨φ|F(Y) E[1] φ⟩ / ⟨φ|F(Y) φ⟩.
//! ```
//!
//! The real part is the λ→0 limit of the conditional pointer average under
//! the standard model with a position pointer, the imaginary part the limit
//! under the boost scheme, given the probe conditions checked below.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::instruments::{
    boost_scheme, boost_scheme_povm, instrument_from_scheme, standard_model, standard_model_povm, Instrument,
    MeasurementScheme,
};
use crate::linalg;
use crate::observables::{first_moment, BinnedObservable};
use crate::operator::Operator;
use crate::space::Space;
use crate::state::{expectation, WaveFunction};

/// Threshold below which a postselection is treated as impossible.
pub const POSTSELECTION_THRESHOLD: f64 = 1e-12;
/// Tolerance on the probe moment conditions.
pub const PROBE_TOL: f64 = 1e-8;
pub const DEFAULT_LADDER: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

/// The weakly measured observable: sharp (given by its operator) or a POVM.
#[derive(Debug, Clone)]
pub enum Measured {
    Sharp(Operator),
    Povm(BinnedObservable),
}

impl Measured {
    pub fn space(&self) -> &Space {
        match self {
            Measured::Sharp(a) => a.space(),
            Measured::Povm(e) => e.space(),
        }
    }

    /// `E[1]`; for a sharp observable this is the operator itself.
    pub fn first_moment(&self) -> Operator {
        match self {
            Measured::Sharp(a) => a.clone(),
            Measured::Povm(e) => first_moment(e),
        }
    }

    pub fn scheme(&self, kind: SchemeKind, probe: &WaveFunction, lambda: f64) -> Result<MeasurementScheme> {
        match (self, kind) {
            (Measured::Sharp(a), SchemeKind::Position) => standard_model(a, probe, lambda),
            (Measured::Sharp(a), SchemeKind::Boost) => boost_scheme(a, probe, lambda),
            (Measured::Povm(e), SchemeKind::Position) => standard_model_povm(e, probe, lambda),
            (Measured::Povm(e), SchemeKind::Boost) => boost_scheme_povm(e, probe, lambda),
        }
    }
}

/// Which pointer the coupling `e^{-iλA⊗P}` is read with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    /// Position pointer (the standard model).
    Position,
    /// Momentum pointer (the boost scheme).
    Boost,
}

/// Preselected state, weakly measured observable and postselection `F(Y)`.
#[derive(Debug, Clone)]
pub struct WeakValueQuery {
    measured: Measured,
    f: BinnedObservable,
    y: Vec<usize>,
    phi: WaveFunction,
    f_y: Operator,
}

impl WeakValueQuery {
    pub fn new(measured: Measured, f: BinnedObservable, y: Vec<usize>, phi: WaveFunction) -> Result<Self> {
        measured.space().ensure_same(f.space())?;
        measured.space().ensure_same(phi.space())?;
        if y.is_empty() {
            return Err(Error::InvalidParameter { name: "Y", reason: "empty postselection set".into() });
        }
        let f_y = f.effect_of(&y)?;
        let mass = expectation(&f_y, &phi)?.re;
        if mass <= POSTSELECTION_THRESHOLD {
            return Err(Error::PostselectionImpossible { mass });
        }
        Ok(Self { measured, f, y, phi, f_y })
    }

    pub fn measured(&self) -> &Measured {
        &self.measured
    }

    pub fn postselection(&self) -> &BinnedObservable {
        &self.f
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn phi(&self) -> &WaveFunction {
        &self.phi
    }

    /// `F(Y)`.
    pub fn f_y(&self) -> &Operator {
        &self.f_y
    }

    /// `⟨φ|F(Y)φ⟩`.
    pub fn postselection_mass(&self) -> f64 {
        expectation(&self.f_y, &self.phi).map(|z| z.re).unwrap_or(0.0)
    }

    /// The same query postselected on the complementary outcomes.
    pub fn complement(&self) -> Result<Self> {
        let y: Vec<usize> = (0..self.f.len()).filter(|i| !self.y.contains(i)).collect();
        Self::new(self.measured.clone(), self.f.clone(), y, self.phi.clone())
    }

    /// `⟨φ|F(Y) E[1] φ⟩`, the weak value numerator.
    pub fn numerator(&self) -> C64 {
        let e1 = self.measured.first_moment();
        let v = e1.matrix() * self.phi.amps();
        linalg::sandwich(self.phi.amps(), self.f_y.matrix(), &v) * self.phi.space().weight()
    }
}

pub fn weak_value(q: &WeakValueQuery) -> Result<C64> {
    let den = q.postselection_mass();
    if den <= POSTSELECTION_THRESHOLD {
        return Err(Error::PostselectionImpossible { mass: den });
    }
    Ok(q.numerator() / den)
}

/// `Σ_x x ⟨φ|I(x)*(F(Y))φ⟩ / Σ_x ⟨φ|I(x)*(F(Y))φ⟩` with bin centres as `x`.
pub fn conditional_average(instr: &Instrument, f: &BinnedObservable, y: &[usize], phi: &WaveFunction) -> Result<f64> {
    let f_y = f.effect_of(y)?;
    let values = instr.dual_expectations(&f_y, phi)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (bin, v) in instr.bins().iter().zip(&values) {
        num += bin.center() * v.re;
        den += v.re;
    }
    if den <= POSTSELECTION_THRESHOLD {
        return Err(Error::PostselectionImpossible { mass: den });
    }
    Ok(num / den)
}

/// Conditional averages along a λ ladder, without probe checks.
pub fn conditional_series(kind: SchemeKind, q: &WeakValueQuery, probe: &WaveFunction, lambdas: &[f64]) -> Result<Vec<(f64, f64)>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let instr = instrument_from_scheme(&q.measured.scheme(kind, probe, lambda)?)?;
            Ok((lambda, conditional_average(&instr, &q.f, &q.y, &q.phi)?))
        })
        .collect()
}

/// Conditional averages along a ladder with their extrapolated λ→0 limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLimitSeries {
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub extrapolated: f64,
    pub fit_residual: f64,
}

impl WeakLimitSeries {
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        let (extrapolated, fit_residual) = extrapolate_weak_limit(points)?;
        Ok(Self {
            lambdas: points.iter().map(|p| p.0).collect(),
            values: points.iter().map(|p| p.1).collect(),
            extrapolated,
            fit_residual,
        })
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.lambdas.iter().copied().zip(self.values.iter().copied()).collect()
    }

    /// `|value(λ) − target|` along the ladder.
    pub fn errors(&self, target: f64) -> Vec<f64> {
        self.values.iter().map(|v| (v - target).abs()).collect()
    }

    /// Ratios of successive errors; about 4 for a quadratic approach when the
    /// ladder halves λ.
    pub fn error_ratios(&self, target: f64) -> Vec<f64> {
        self.errors(target).windows(2).map(|w| w[0] / w[1]).collect()
    }

    pub fn is_monotone(&self, target: f64) -> bool {
        self.errors(target).windows(2).all(|w| w[1] <= w[0])
    }
}

/// Moments of a probe wavefunction on its grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeMoments {
    pub mean_q: f64,
    pub mean_p: f64,
    pub mean_p2: f64,
    /// `⟨φ|QPφ⟩`
    pub qp: C64,
    /// `⟨φ|PQφ⟩`
    pub pq: C64,
}

impl ProbeMoments {
    /// `⟨φ|{Q,P}φ⟩`.
    pub fn anticommutator(&self) -> f64 {
        (self.qp + self.pq).re
    }
}

pub fn probe_moments(probe: &WaveFunction) -> Result<ProbeMoments> {
    let grid = *probe.space().require_grid()?;
    let phi = probe.amps();
    let dx = grid.dx();
    let p_phi = fourier::momentum_multiplier(&grid, phi, C64::from);
    let x = DVector::from_iterator(grid.n(), grid.points().into_iter().map(C64::from));
    let q_phi = phi.component_mul(&x);
    Ok(ProbeMoments {
        mean_q: phi.dotc(&q_phi).re * dx,
        mean_p: phi.dotc(&p_phi).re * dx,
        mean_p2: p_phi.norm_squared() * dx,
        qp: q_phi.dotc(&p_phi) * dx,
        pq: p_phi.dotc(&q_phi) * dx,
    })
}

fn probe_condition(name: &str, found: C64, wanted: C64) -> Result<()> {
    let dev = (found - wanted).norm();
    if dev > PROBE_TOL {
        return Err(Error::ProbeCondition(format!("{name} = {found:.3e}, need {wanted} (off by {dev:.3e})")));
    }
    Ok(())
}

/// Standard-model series whose limit is `Re E_w`; requires `⟨Q⟩ = 0` and
/// `⟨QP⟩ = i/2` for the probe.
pub fn prop1_realpart(q: &WeakValueQuery, probe: &WaveFunction, lambdas: &[f64]) -> Result<WeakLimitSeries> {
    let m = probe_moments(probe)?;
    probe_condition("⟨Q⟩", C64::from(m.mean_q), C64::from(0.0))?;
    probe_condition("⟨QP⟩", m.qp, C64::new(0.0, 0.5))?;
    check_ladder(lambdas)?;
    WeakLimitSeries::from_points(&conditional_series(SchemeKind::Position, q, probe, lambdas)?)
}

/// Boost-scheme series whose limit is `Im E_w`; requires `⟨P⟩ = 0` and
/// `⟨P²⟩ = 1/2` for the probe.
pub fn prop2_imagpart(q: &WeakValueQuery, probe: &WaveFunction, lambdas: &[f64]) -> Result<WeakLimitSeries> {
    let m = probe_moments(probe)?;
    probe_condition("⟨P⟩", C64::from(m.mean_p), C64::from(0.0))?;
    probe_condition("⟨P²⟩", C64::from(m.mean_p2), C64::from(0.5))?;
    check_ladder(lambdas)?;
    WeakLimitSeries::from_points(&conditional_series(SchemeKind::Boost, q, probe, lambdas)?)
}

fn check_ladder(lambdas: &[f64]) -> Result<()> {
    if lambdas.len() < 3 {
        return Err(Error::TooFewPoints(lambdas.len()));
    }
    if lambdas.iter().any(|l| !(*l > 0.0)) || lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::NotStrictlyDecreasing);
    }
    Ok(())
}

/// The zero-coupling limit of the position-pointer conditional average for
/// an arbitrary centred probe:
///
/// ```text
/// (i⟨E[1]φ|F(Y)φ⟩⟨PQ⟩ − i⟨F(Y)φ|E[1]φ⟩⟨QP⟩) / ⟨φ|F(Y)φ⟩
/// ```
///
/// with the probe moments evaluated on its grid.
pub fn zero_coupling_limit(q: &WeakValueQuery, probe: &WaveFunction) -> Result<C64> {
    let m = probe_moments(probe)?;
    let z = q.numerator();
    let i = C64::i();
    Ok((i * z.conj() * m.pq - i * z * m.qp) / q.postselection_mass())
}

/// Least-squares fit `value(λ) = a + bλ + cλ²`; returns `a` and the
/// Euclidean norm of the fit residuals.
pub fn extrapolate_weak_limit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    let lambdas: Vec<f64> = points.iter().map(|p| p.0).collect();
    check_ladder(&lambdas)?;
    let n = points.len();
    let x = DMatrix::from_fn(n, 3, |r, c| points[r].0.powi(c as i32));
    let b = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let coef = x
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidParameter { name: "lambdas", reason: e.to_string() })?;
    let residual = (&x * &coef - &b).norm();
    Ok((coef[0], residual))
}

/// JSON-facing summary of one weak-value experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakValueRecord {
    pub query: String,
    pub scheme: SchemeKind,
    #[serde(with = "crate::serialize::complex")]
    pub weak_value: C64,
    pub series: Vec<[f64; 2]>,
    pub extrapolated: f64,
    pub residual: f64,
}

impl WeakValueRecord {
    pub fn new(query: impl Into<String>, scheme: SchemeKind, weak_value: C64, series: &WeakLimitSeries) -> Self {
        Self {
            query: query.into(),
            scheme,
            weak_value,
            series: series.points().into_iter().map(|(l, v)| [l, v]).collect(),
            extrapolated: series.extrapolated,
            residual: series.fit_residual,
        }
    }
}
