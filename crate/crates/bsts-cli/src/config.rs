//! Configuration file schema and CLI-flag overrides.
//!
//! Everything lives in one TOML file; each subcommand reads the sections it
//! needs. Unknown keys are rejected so typos surface as errors with a line
//! position instead of silently falling back to defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use bsts_core::forecast::CrpsForm;
use bsts_core::gibbs::{McmcConfig, ModelConfig, PriorHyper, PriorKind};
use bsts_core::shrinkage::{HorseshoeHyper, SsvsHyper};
use bsts_core::sim::{DgpSpec, SimStudyConfig};
use bsts_core::state::StatePriorConfig;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub mcmc: McmcSection,
    #[serde(default)]
    pub state_prior: StatePriorSection,
    #[serde(default)]
    pub horseshoe: Option<HorseshoeHyper>,
    #[serde(default)]
    pub ssvs: Option<SsvsHyper>,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    #[serde(default)]
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub prior: String,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            prior: "horseshoe-savs".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSection {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub chains: usize,
    pub seed: u64,
}

impl Default for McmcSection {
    fn default() -> Self {
        let d = McmcConfig::default();
        Self {
            iterations: d.n_iter,
            burn_in: d.n_burn,
            thin: d.thin,
            chains: d.n_chains,
            seed: d.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatePriorSection {
    pub mean: [f64; 4],
    pub variance: [f64; 4],
}

impl Default for StatePriorSection {
    fn default() -> Self {
        let d = StatePriorConfig::default();
        Self {
            mean: d.mean,
            variance: d.var,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub quarterly: Option<PathBuf>,
    pub monthly: Option<PathBuf>,
    /// Calendar TOML; the built-in release schedule is used when absent.
    pub calendar: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    /// Quarters reserved for training before the first nowcast origin.
    pub training_quarters: usize,
    /// Rolling origins; defaults to everything after the training window.
    pub eval_quarters: Option<usize>,
    /// Model names to evaluate; default all three priors.
    pub models: Vec<String>,
    pub include_ar2: bool,
    /// "proper" (default) or "halved".
    pub crps_form: String,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            training_quarters: 45,
            eval_quarters: None,
            models: vec![
                "ssvs".to_string(),
                "horseshoe".to_string(),
                "horseshoe-savs".to_string(),
            ],
            include_ar2: true,
            crps_form: "proper".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    /// "desk" (60 columns, 10 reps) or "full" (300 columns, 20 reps).
    pub preset: String,
    pub t_len: Option<usize>,
    pub k_columns: Option<usize>,
    pub n_reps: Option<usize>,
    pub sigma_y: Option<f64>,
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            preset: "desk".to_string(),
            t_len: None,
            k_columns: None,
            n_reps: None,
            sigma_y: None,
            seed: None,
            iterations: None,
            burn_in: None,
            thin: None,
        }
    }
}

/// Flag overrides shared by all subcommands.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// RNG seed, overriding the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Regression prior (ssvs | horseshoe | horseshoe-savs).
    #[arg(long)]
    pub prior: Option<String>,
    /// Total Gibbs iterations.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Burn-in iterations.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Thinning stride.
    #[arg(long)]
    pub thin: Option<usize>,
    /// Independent chains.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Quarterly target CSV, overriding the config file.
    #[arg(long)]
    pub quarterly: Option<PathBuf>,
    /// Monthly regressor CSV, overriding the config file.
    #[arg(long)]
    pub monthly: Option<PathBuf>,
    /// Calendar TOML, overriding the config file.
    #[arg(long)]
    pub calendar: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let cfg: FileConfig = toml::from_str(&text)
                    .map_err(|e| anyhow::Error::from(bsts_core::Error::Config(format!(
                        "{}: {e}",
                        p.display()
                    ))))?;
                Ok(cfg)
            }
        }
    }

    /// Fold command-line overrides into the file values.
    pub fn apply_overrides(&mut self, ov: &Overrides) {
        if let Some(seed) = ov.seed {
            self.mcmc.seed = seed;
            self.simulation.seed = Some(seed);
        }
        if let Some(prior) = &ov.prior {
            self.model.prior = prior.clone();
        }
        if let Some(v) = ov.iterations {
            self.mcmc.iterations = v;
        }
        if let Some(v) = ov.burn_in {
            self.mcmc.burn_in = v;
        }
        if let Some(v) = ov.thin {
            self.mcmc.thin = v;
        }
        if let Some(v) = ov.chains {
            self.mcmc.chains = v;
        }
        if let Some(p) = &ov.quarterly {
            self.data.quarterly = Some(p.clone());
        }
        if let Some(p) = &ov.monthly {
            self.data.monthly = Some(p.clone());
        }
        if let Some(p) = &ov.calendar {
            self.data.calendar = Some(p.clone());
        }
    }

    pub fn model_config(&self) -> Result<ModelConfig> {
        let prior_kind: PriorKind = self.model.prior.parse::<PriorKind>()?;
        let config = ModelConfig {
            prior_kind,
            mcmc: McmcConfig {
                n_iter: self.mcmc.iterations,
                n_burn: self.mcmc.burn_in,
                thin: self.mcmc.thin,
                n_chains: self.mcmc.chains,
                seed: self.mcmc.seed,
            },
            state_prior: StatePriorConfig::new(self.state_prior.mean, self.state_prior.variance)?,
            prior_hyper: PriorHyper {
                horseshoe: self.horseshoe.unwrap_or_default(),
                ssvs: self.ssvs.unwrap_or_default(),
            },
        };
        config.validate()?;
        Ok(config)
    }

    /// Model configuration with the prior swapped out (used by `evaluate`,
    /// which runs several priors under one MCMC block).
    pub fn model_config_for(&self, prior: &str) -> Result<ModelConfig> {
        let mut config = self.model_config()?;
        config.prior_kind = prior.parse::<PriorKind>()?;
        Ok(config)
    }

    pub fn crps_form(&self) -> Result<CrpsForm> {
        match self.evaluation.crps_form.as_str() {
            "proper" => Ok(CrpsForm::Proper),
            "halved" => Ok(CrpsForm::Halved),
            other => bail!(bsts_core::Error::Config(format!(
                "unknown crps form '{other}' (expected proper | halved)"
            ))),
        }
    }

    pub fn sim_config(&self) -> Result<SimStudyConfig> {
        let sec = &self.simulation;
        let seed = sec.seed.unwrap_or(self.mcmc.seed);
        let mut cfg = match sec.preset.as_str() {
            "desk" => SimStudyConfig::desk(seed),
            "full" => SimStudyConfig::full(seed),
            other => bail!(bsts_core::Error::Config(format!(
                "unknown simulation preset '{other}' (expected desk | full)"
            ))),
        };
        cfg.dgp = DgpSpec {
            t_len: sec.t_len.unwrap_or(cfg.dgp.t_len),
            k_columns: sec.k_columns.unwrap_or(cfg.dgp.k_columns),
            n_reps: sec.n_reps.unwrap_or(cfg.dgp.n_reps),
            sigma_y_true: sec.sigma_y.unwrap_or(cfg.dgp.sigma_y_true),
            ..cfg.dgp
        };
        cfg.mcmc = McmcConfig {
            n_iter: sec.iterations.unwrap_or(cfg.mcmc.n_iter),
            n_burn: sec.burn_in.unwrap_or(cfg.mcmc.n_burn),
            thin: sec.thin.unwrap_or(cfg.mcmc.thin),
            ..cfg.mcmc
        };
        // a custom budget applies to every chain
        if sec.iterations.is_some() || sec.burn_in.is_some() || sec.thin.is_some() {
            cfg.ssvs_mcmc = None;
        }
        cfg.state_prior = StatePriorConfig::new(self.state_prior.mean, self.state_prior.variance)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
