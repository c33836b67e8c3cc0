//! Run configuration: the TOML schema, defaults, validation, and the mapping
//! onto the solver types.

use std::path::Path;

use serde::{Deserialize, Serialize};

use dls_core::adaptive::AdaptiveConfig;
use dls_core::evaluate::default_eval_resolution;
use dls_core::loss::LossWeights;
use dls_core::network::{DerivativeMode, MlpParams, DEFAULT_FD_STEP};
use dls_core::problems::{builtin, ProblemParams, ProblemSpec};
use dls_core::trainer::TrainConfig;

use crate::CliError;

/// Full run configuration as read from a config file (after applying
/// command-line overrides). The echo written into the run directory is this
/// structure serialized back to TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub network: NetworkSection,
    pub sampling: SamplingSection,
    #[serde(default)]
    pub loss: LossSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<AdaptiveSection>,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    /// Sunflower only: radial variable of the exact solution measured from
    /// the petal center instead of the origin.
    #[serde(default)]
    pub r_from_center: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub hidden_layers: usize,
    #[serde(default = "default_hidden_width")]
    pub hidden_width: usize,
}

fn default_hidden_width() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    /// Interior cell-center grid resolution per dimension.
    pub grid_per_dim: usize,
    /// Number of interface samples.
    pub interface: usize,
    /// Boundary points per face (edges in 2D).
    pub boundary_per_face: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSection {
    pub beta_j: f64,
    pub beta_f: f64,
    pub alpha: f64,
}

impl Default for LossSection {
    fn default() -> Self {
        let w = LossWeights::default();
        Self {
            beta_j: w.beta_j,
            beta_f: w.beta_f,
            alpha: w.alpha,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: u64,
    pub learning_rate: f64,
    pub seed: u64,
    pub log_every: u64,
    pub checkpoint_every: u64,
    /// `"autodiff"` or `"fd"`.
    pub derivative_mode: String,
    /// Step for `"fd"` mode.
    pub fd_step: f64,
    /// Per-epoch multiplicative learning-rate decay (1.0 = constant rate).
    #[serde(default = "default_lr_decay")]
    pub lr_decay: f64,
    /// Stop after this many stale log points (0 = run all epochs).
    #[serde(default)]
    pub early_stop_patience: u64,
}

fn default_lr_decay() -> f64 {
    1.0
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            epochs: 200_000,
            learning_rate: 0.001,
            seed: 0,
            log_every: 1000,
            checkpoint_every: 0,
            derivative_mode: "autodiff".into(),
            fd_step: DEFAULT_FD_STEP,
            lr_decay: 1.0,
            early_stop_patience: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveSection {
    pub refine_factor: usize,
    pub keep_fraction: f64,
    pub levels: usize,
    pub per_category_ranking: bool,
    pub warm_start: bool,
    #[serde(default)]
    pub refine_boundary: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs_per_level: Option<u64>,
    /// When set, also train a uniform run at this grid resolution for the
    /// same total epoch budget and append it to `levels.csv` as level -1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_reference: Option<usize>,
}

impl Default for AdaptiveSection {
    fn default() -> Self {
        let cfg = AdaptiveConfig::default();
        Self {
            refine_factor: cfg.refine_factor,
            keep_fraction: cfg.keep_fraction,
            levels: cfg.levels,
            per_category_ranking: cfg.per_category_ranking,
            warm_start: cfg.warm_start,
            refine_boundary: cfg.refine_boundary,
            epochs_per_level: cfg.epochs_per_level,
            uniform_reference: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    /// Error-evaluation grid resolution per dimension (defaults to 201 in 2D
    /// and 51 in 3D).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_per_dim: Option<usize>,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub epochs: Option<u64>,
    pub derivative_mode: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config `{}`:\n{e}", path.display())))?;
        if let Some(seed) = overrides.seed {
            cfg.train.seed = seed;
        }
        if let Some(epochs) = overrides.epochs {
            cfg.train.epochs = epochs;
        }
        if let Some(mode) = &overrides.derivative_mode {
            cfg.train.derivative_mode = mode.clone();
        }
        if let Some(out) = &overrides.out {
            cfg.output_dir = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.network.hidden_layers == 0 || self.network.hidden_width == 0 {
            return Err(CliError::Config(
                "network.hidden_layers and network.hidden_width must be positive".into(),
            ));
        }
        if self.sampling.grid_per_dim < 2 {
            return Err(CliError::Config(
                "sampling.grid_per_dim must be at least 2".into(),
            ));
        }
        if self.sampling.interface == 0 || self.sampling.boundary_per_face == 0 {
            return Err(CliError::Config(
                "sampling.interface and sampling.boundary_per_face must be positive".into(),
            ));
        }
        self.derivative_mode()?;
        self.to_train_config()?.validate().map_err(CliError::from)?;
        if let Some(a) = &self.adaptive {
            self.to_adaptive_config(a)?
                .validate()
                .map_err(CliError::from)?;
        }
        Ok(())
    }

    pub fn derivative_mode(&self) -> Result<DerivativeMode, CliError> {
        match self.train.derivative_mode.as_str() {
            "autodiff" => Ok(DerivativeMode::Autodiff),
            "fd" => Ok(DerivativeMode::FiniteDifference {
                h: self.train.fd_step,
            }),
            other => Err(CliError::Config(format!(
                "train.derivative_mode must be `autodiff` or `fd`, got `{other}`"
            ))),
        }
    }

    pub fn build_problem(&self) -> Result<ProblemSpec, CliError> {
        let params = ProblemParams {
            beta1: self.problem.beta1,
            beta2: self.problem.beta2,
            r_from_center: self.problem.r_from_center,
        };
        builtin(&self.problem.name, &params).map_err(CliError::from)
    }

    pub fn widths(&self, dim: usize) -> Vec<usize> {
        MlpParams::standard_widths(dim, self.network.hidden_layers, self.network.hidden_width)
    }

    pub fn loss_weights(&self) -> LossWeights {
        LossWeights {
            beta_j: self.loss.beta_j,
            beta_f: self.loss.beta_f,
            alpha: self.loss.alpha,
        }
    }

    pub fn to_train_config(&self) -> Result<TrainConfig, CliError> {
        Ok(TrainConfig {
            epochs: self.train.epochs,
            learning_rate: self.train.learning_rate,
            seed: self.train.seed,
            log_every: self.train.log_every,
            derivative_mode: self.derivative_mode()?,
            checkpoint_every: self.train.checkpoint_every,
            lr_decay: self.train.lr_decay,
            early_stop_patience: self.train.early_stop_patience,
        })
    }

    pub fn to_adaptive_config(
        &self,
        section: &AdaptiveSection,
    ) -> Result<AdaptiveConfig, CliError> {
        Ok(AdaptiveConfig {
            refine_factor: section.refine_factor,
            keep_fraction: section.keep_fraction,
            levels: section.levels,
            per_category_ranking: section.per_category_ranking,
            warm_start: section.warm_start,
            refine_boundary: section.refine_boundary,
            train: self.to_train_config()?,
            epochs_per_level: section.epochs_per_level,
        })
    }

    pub fn eval_resolution(&self, dim: usize) -> usize {
        self.evaluation
            .grid_per_dim
            .unwrap_or_else(|| default_eval_resolution(dim))
    }

    /// Run directory: explicit `output_dir` or a deterministic default.
    pub fn resolved_output_dir(&self, command: &str) -> String {
        self.output_dir.clone().unwrap_or_else(|| {
            format!(
                "runs/{}-{}-seed{}",
                self.problem.name, command, self.train.seed
            )
        })
    }

    pub fn echo_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self)
            .map_err(|e| CliError::Config(format!("cannot serialize config echo: {e}")))
    }
}
