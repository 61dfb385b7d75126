//! The canned experiments and their result records.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use weakmeas::fourier;
use weakmeas::instruments::{measured_observable, standard_model};
use weakmeas::observables::{label_bins, sharp_observable, support};
use weakmeas::reconstruction::{
    completeness_check, covariant_observable_kernel, husimi, lundeen_reconstruct, phase_space_reconstruct, CompletenessReport,
    InversionOptions, PhaseAxis, PhaseSpaceDistribution, ReconstructionReport,
};
use weakmeas::serialize::pair;
use weakmeas::state::gaussian_state;
use weakmeas::weak_values::{prop1_realpart, prop2_imagpart, weak_value, Measured, SchemeKind, WeakValueQuery, WeakValueRecord};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliResult;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub duration_seconds: f64,
    pub result: Payload,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    WeakLimit(WeakLimitResult),
    Lundeen(Box<LundeenResult>),
    PhaseSpace(PhaseSpaceResult),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeakLimitResult {
    pub record: WeakValueRecord,
    /// The part of the weak value the series converges to.
    pub target: f64,
    pub extrapolation_error: f64,
    pub error_ratios: Vec<f64>,
    /// Bins in the support of the standard-model observable at the smallest λ.
    pub pointer_support: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LundeenRow {
    pub x: f64,
    pub estimate: [f64; 2],
    pub truth: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderStep {
    pub bins: usize,
    pub alpha: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LundeenResult {
    pub report: ReconstructionReport,
    pub table: Vec<LundeenRow>,
    pub ladder: Vec<LadderStep>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseSpaceResult {
    pub husimi: PhaseSpaceDistribution,
    pub completeness: CompletenessReport,
    pub trace_distance: f64,
    pub projection_distance: f64,
    pub coverage: f64,
    pub ill_posed: bool,
    pub purity: f64,
}

/// Run the configured experiment. A failed postselection still produces a
/// record; the caller reports it through the exit code.
pub fn execute(cfg: &ExperimentConfig) -> CliResult<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let result = match cfg.experiment {
        Experiment::Prop1 | Experiment::Prop2 => Payload::WeakLimit(run_weak(cfg)?),
        Experiment::Lundeen | Experiment::LundeenFail => Payload::Lundeen(Box::new(run_lundeen(cfg)?)),
        Experiment::Phasespace => Payload::PhaseSpace(run_phasespace(cfg)?),
    };
    Ok(RunRecord {
        version: weakmeas::VERSION.to_string(),
        experiment: cfg.experiment,
        config: cfg.clone(),
        duration_seconds: start.elapsed().as_secs_f64(),
        result,
    })
}

fn run_weak(cfg: &ExperimentConfig) -> CliResult<WeakLimitResult> {
    let grid = cfg.grid()?;
    let w = cfg.weak()?;
    let phi = cfg.qubit_state()?;
    let f = sharp_observable(&w.postselect_axis.operator(), label_bins(&[-1.0, 1.0])?)?;
    let y = vec![usize::from(w.postselect_outcome > 0.0)];
    let a = w.observable.operator();
    let query = WeakValueQuery::new(Measured::Sharp(a.clone()), f, y, phi)?;
    let probe = gaussian_state(grid, w.probe_delta, 0.0, 0.0)?;
    let wv = weak_value(&query)?;
    let (series, scheme, target) = match cfg.experiment {
        Experiment::Prop2 => (prop2_imagpart(&query, &probe, &w.lambdas)?, SchemeKind::Boost, wv.im),
        _ => (prop1_realpart(&query, &probe, &w.lambdas)?, SchemeKind::Position, wv.re),
    };
    let smallest = *w.lambdas.last().expect("validated ladder");
    let e = measured_observable(&standard_model(&a, &probe, smallest)?)?;
    let pointer_support = support(&e, cfg.numerics.support_threshold)?.len();
    let label = format!("sigma_{:?} | sigma_{:?} = {}", w.observable, w.postselect_axis, w.postselect_outcome).to_lowercase();
    Ok(WeakLimitResult {
        extrapolation_error: (series.extrapolated - target).abs(),
        error_ratios: series.error_ratios(target),
        record: WeakValueRecord::new(label, scheme, wv, &series),
        target,
        pointer_support,
    })
}

fn run_lundeen(cfg: &ExperimentConfig) -> CliResult<LundeenResult> {
    let grid = cfg.grid()?;
    let truth = cfg.grid_state(grid)?;
    let main = cfg.lundeen_config()?;
    let report = lundeen_reconstruct(&truth, &main)?;
    let failed = report.diagnostics.postselection_failed;

    let mut table = Vec::with_capacity(report.centers.len());
    if let Some(est) = &report.estimate {
        // align the truth's global phase with the estimate
        let overlap = truth.inner(est)?;
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::from(1.0) };
        let coeffs = fourier::forward(&grid, truth.amps());
        for &x in &report.centers {
            let k = grid.nearest_index(x).unwrap_or(0);
            table.push(LundeenRow {
                x,
                estimate: pair(est.amps()[k]),
                truth: pair(fourier::interpolate_from_coeffs(&grid, &coeffs, x) * phase),
            });
        }
    }

    let mut ladder = Vec::new();
    if !failed {
        for step in cfg.ladder()? {
            let r = lundeen_reconstruct(&truth, &step)?;
            ladder.push(LadderStep { bins: step.bins, alpha: step.alpha, fidelity: r.fidelity_vs_truth.unwrap_or(0.0) });
        }
    }
    Ok(LundeenResult { report, table, ladder })
}

fn run_phasespace(cfg: &ExperimentConfig) -> CliResult<PhaseSpaceResult> {
    let grid = cfg.grid()?;
    let ps = cfg.phasespace()?;
    let rho = cfg.density(grid)?;
    let kernel = covariant_observable_kernel(&gaussian_state(grid, ps.kernel_delta, 0.0, 0.0)?, ps.lambda)?;
    let (qa, pa) = cfg.phase_axes()?;
    let h = husimi(&rho, &kernel, qa, pa)?;
    let opts = InversionOptions { extent: ps.char_extent, tau: ps.tau, completeness_samples: ps.completeness_samples };
    let working = PhaseAxis::new(-ps.char_extent, ps.char_extent, ps.completeness_samples)?;
    let completeness = completeness_check(&kernel, working, working)?;
    let rep = phase_space_reconstruct(&h, &kernel, opts)?;
    Ok(PhaseSpaceResult {
        trace_distance: rep.state.trace_distance(&rho)?,
        projection_distance: rep.projection_distance,
        coverage: rep.coverage,
        ill_posed: rep.ill_posed,
        purity: rep.state.purity(),
        husimi: h,
        completeness,
    })
}
