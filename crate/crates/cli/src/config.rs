//! Experiment configuration files (TOML).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use weakmeas::observables::DEFAULT_SUPPORT_THRESHOLD;
use weakmeas::operator::{qubit_ops, Operator};
use weakmeas::reconstruction::{LundeenConfig, PhaseAxis};
use weakmeas::state::gaussian_state;
use weakmeas::{DensityOperator, GridSpec, WaveFunction};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Prop1,
    Prop2,
    Lundeen,
    LundeenFail,
    Phasespace,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Prop1 => "prop1",
            Experiment::Prop2 => "prop2",
            Experiment::Lundeen => "lundeen",
            Experiment::LundeenFail => "lundeen-fail",
            Experiment::Phasespace => "phasespace",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Only used by randomized sweeps; the canned experiments are deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    pub grid: GridConfig,
    pub state: StateConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak: Option<WeakConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lundeen: Option<LundeenSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phasespace: Option<PhaseSpaceSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory below the output root; defaults to the experiment name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// Position grid: the probe grid for weak-value runs, the system grid otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateConfig {
    /// Qubit amplitudes as `[re, im]` pairs; renormalized.
    Qubit { amplitudes: [[f64; 2]; 2] },
    Gaussian {
        delta: f64,
        #[serde(default)]
        x0: f64,
        #[serde(default)]
        p0: f64,
    },
    Mixture { components: Vec<MixtureComponent> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub delta: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub p0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// Operator-norm threshold for reported observable supports.
    pub support_threshold: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self { support_threshold: DEFAULT_SUPPORT_THRESHOLD }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn operator(self) -> Operator {
        let ops = qubit_ops();
        match self {
            Axis::X => ops.sigma_x,
            Axis::Y => ops.sigma_y,
            Axis::Z => ops.sigma_z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakConfig {
    /// Measured observable σ_axis.
    pub observable: Axis,
    /// Postselection on the eigenvalue `postselect_outcome` of σ_axis.
    pub postselect_axis: Axis,
    pub postselect_outcome: f64,
    /// Gaussian probe width Δ.
    pub probe_delta: f64,
    /// Strictly decreasing coupling ladder.
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LundeenSection {
    pub window: [f64; 2],
    pub bins: usize,
    pub alpha: f64,
    /// Momentum window width in units of dp.
    pub epsilon_dp: f64,
    /// Refinement steps (bins doubling, α halving) starting at half the bins
    /// and twice α, so 3 steps bracket the main setting; 0 disables the ladder.
    #[serde(default)]
    pub ladder_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpaceSection {
    /// Gaussian probe width Δ generating the kernel.
    pub kernel_delta: f64,
    pub lambda: f64,
    pub q_box: [f64; 2],
    pub p_box: [f64; 2],
    pub samples: usize,
    /// Division threshold on the kernel characteristic function.
    pub tau: f64,
    /// Half-width of the characteristic-plane working box.
    pub char_extent: f64,
    pub completeness_samples: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Validation(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Other(e.to_string()))
    }

    pub fn grid(&self) -> CliResult<GridSpec> {
        GridSpec::new(self.grid.n, self.grid.length).map_err(|e| CliError::field("grid", e))
    }

    pub fn output_dir(&self) -> String {
        self.output.dir.clone().unwrap_or_else(|| self.experiment.name().to_string())
    }

    /// Check every parameter against the owning module's ranges.
    pub fn validate(&self) -> CliResult<()> {
        let grid = self.grid()?;
        let t = self.numerics.support_threshold;
        if !(t > 0.0 && t <= 1e-3) {
            return Err(CliError::field("numerics.support_threshold", format!("{t} not in (0, 1e-3]")));
        }
        match self.experiment {
            Experiment::Prop1 | Experiment::Prop2 => {
                self.qubit_state()?;
                let w = self.weak()?;
                if w.postselect_outcome.abs() != 1.0 {
                    return Err(CliError::field("weak.postselect_outcome", "must be +1 or -1"));
                }
                gaussian_state(grid, w.probe_delta, 0.0, 0.0).map_err(|e| CliError::field("weak.probe_delta", e))?;
                if w.lambdas.len() < 3 {
                    return Err(CliError::field("weak.lambdas", "need at least 3 couplings"));
                }
                if w.lambdas.iter().any(|l| !(*l > 0.0)) || w.lambdas.windows(2).any(|p| p[1] >= p[0]) {
                    return Err(CliError::field("weak.lambdas", "must be positive and strictly decreasing"));
                }
            }
            Experiment::Lundeen | Experiment::LundeenFail => {
                self.grid_state(grid)?;
                let cfg = self.lundeen_config()?;
                cfg.validate().map_err(|e| CliError::field("lundeen", e))?;
                for (k, c) in self.ladder()?.iter().enumerate() {
                    c.validate().map_err(|e| CliError::field(&format!("lundeen.ladder_steps (step {k})"), e))?;
                }
            }
            Experiment::Phasespace => {
                self.density(grid)?;
                let ps = self.phasespace()?;
                gaussian_state(grid, ps.kernel_delta, 0.0, 0.0).map_err(|e| CliError::field("phasespace.kernel_delta", e))?;
                if !(ps.lambda > 0.0) {
                    return Err(CliError::field("phasespace.lambda", "must be positive"));
                }
                self.phase_axes()?;
                if !(ps.tau > 0.0) {
                    return Err(CliError::field("phasespace.tau", "must be positive"));
                }
                if !(ps.char_extent > 0.0) || ps.char_extent > 0.5 * grid.length() || ps.char_extent > grid.p_max() {
                    return Err(CliError::field("phasespace.char_extent", "outside the Weyl validity box"));
                }
                if ps.completeness_samples < 2 {
                    return Err(CliError::field("phasespace.completeness_samples", "need at least 2"));
                }
            }
        }
        Ok(())
    }

    pub fn weak(&self) -> CliResult<&WeakConfig> {
        self.weak.as_ref().ok_or_else(|| CliError::field("weak", "section missing"))
    }

    pub fn phasespace(&self) -> CliResult<&PhaseSpaceSection> {
        self.phasespace.as_ref().ok_or_else(|| CliError::field("phasespace", "section missing"))
    }

    fn lundeen_section(&self) -> CliResult<&LundeenSection> {
        self.lundeen.as_ref().ok_or_else(|| CliError::field("lundeen", "section missing"))
    }

    pub fn qubit_state(&self) -> CliResult<WaveFunction> {
        match &self.state {
            StateConfig::Qubit { amplitudes: [a, b] } => {
                WaveFunction::qubit(C64::new(a[0], a[1]), C64::new(b[0], b[1])).map_err(|e| CliError::field("state.amplitudes", e))
            }
            _ => Err(CliError::field("state.kind", "this experiment needs a qubit state")),
        }
    }

    pub fn grid_state(&self, grid: GridSpec) -> CliResult<WaveFunction> {
        match &self.state {
            StateConfig::Gaussian { delta, x0, p0 } => gaussian_state(grid, *delta, *x0, *p0).map_err(|e| CliError::field("state", e)),
            _ => Err(CliError::field("state.kind", "this experiment needs a gaussian state")),
        }
    }

    pub fn density(&self, grid: GridSpec) -> CliResult<DensityOperator> {
        match &self.state {
            StateConfig::Mixture { components } => {
                let parts = components
                    .iter()
                    .map(|c| Ok((c.weight, gaussian_state(grid, c.delta, c.x0, c.p0)?)))
                    .collect::<weakmeas::Result<Vec<_>>>()
                    .map_err(|e| CliError::field("state.components", e))?;
                DensityOperator::mixture(&parts).map_err(|e| CliError::field("state.components", e))
            }
            StateConfig::Gaussian { .. } => Ok(DensityOperator::from_pure(&self.grid_state(grid)?)),
            StateConfig::Qubit { .. } => Err(CliError::field("state.kind", "this experiment needs a grid state")),
        }
    }

    pub fn lundeen_config(&self) -> CliResult<LundeenConfig> {
        let l = self.lundeen_section()?;
        let grid = self.grid()?;
        Ok(LundeenConfig { grid, window: l.window, bins: l.bins, alpha: l.alpha, epsilon: l.epsilon_dp * grid.dp() })
    }

    /// The refinement ladder; step k has `bins·2^(k−1)` intervals and `α/2^(k−1)`.
    pub fn ladder(&self) -> CliResult<Vec<LundeenConfig>> {
        let base = self.lundeen_config()?;
        let steps = self.lundeen_section()?.ladder_steps;
        Ok((0..steps)
            .map(|k| {
                let scale = 2f64.powi(1 - k as i32);
                LundeenConfig { bins: (base.bins as f64 / scale).round().max(1.0) as usize, alpha: base.alpha * scale, ..base }
            })
            .collect())
    }

    pub fn phase_axes(&self) -> CliResult<(PhaseAxis, PhaseAxis)> {
        let ps = self.phasespace()?;
        let q = PhaseAxis::new(ps.q_box[0], ps.q_box[1], ps.samples).map_err(|e| CliError::field("phasespace.q_box", e))?;
        let p = PhaseAxis::new(ps.p_box[0], ps.p_box[1], ps.samples).map_err(|e| CliError::field("phasespace.p_box", e))?;
        Ok((q, p))
    }
}
