//! Experiment configuration: explicit flags override an optional TOML config
//! file, which overrides per-kind defaults. The master seed falls back to
//! the `SEMICP_SEED` environment variable before the built-in constant.

use crate::error::HarnessError;
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Deviation threshold of the mean-field experiment.
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Built-in master seed when neither `--seed` nor `SEMICP_SEED` is given.
pub const DEFAULT_MASTER_SEED: u64 = 0x53454D_4943_5001;

pub const SEED_ENV_VAR: &str = "SEMICP_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Sweep,
    MeanField,
    CouplingAudit,
    Lumping,
    Aux,
    Ode,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::MeanField => "meanfield",
            ExperimentKind::CouplingAudit => "coupling-audit",
            ExperimentKind::Lumping => "lumping",
            ExperimentKind::Aux => "aux",
            ExperimentKind::Ode => "ode",
        }
    }

    pub fn default_replicas(&self) -> u64 {
        match self {
            ExperimentKind::Sweep => 1_000,
            ExperimentKind::MeanField => 100,
            ExperimentKind::CouplingAudit => 10_000,
            ExperimentKind::Lumping => 100_000,
            ExperimentKind::Aux => 1_000,
            ExperimentKind::Ode => 1,
        }
    }

    pub fn default_horizon(&self) -> f64 {
        match self {
            ExperimentKind::Sweep | ExperimentKind::Aux => 1e3,
            ExperimentKind::MeanField | ExperimentKind::CouplingAudit => 5.0,
            ExperimentKind::Lumping => 2.0,
            ExperimentKind::Ode => 20.0,
        }
    }

    pub fn default_n(&self) -> Vec<u64> {
        match self {
            ExperimentKind::Sweep => vec![100, 200, 400, 800],
            ExperimentKind::MeanField => vec![1_000, 2_000, 4_000, 8_000],
            ExperimentKind::CouplingAudit => vec![20, 100],
            ExperimentKind::Lumping => vec![6],
            ExperimentKind::Aux => vec![1_000],
            ExperimentKind::Ode => vec![1],
        }
    }

    pub fn default_lambda(&self) -> Vec<f64> {
        match self {
            ExperimentKind::Sweep => vec![2.0, 6.0],
            ExperimentKind::MeanField => vec![3.0],
            ExperimentKind::CouplingAudit => vec![1.0, 3.0, 6.0],
            ExperimentKind::Lumping => vec![1.5],
            ExperimentKind::Aux => vec![5.0],
            ExperimentKind::Ode => vec![2.0, 6.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        match text {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(HarnessError::Usage(format!(
                "unknown format {other:?} (expected csv or json)"
            ))),
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n_list: Vec<u64>,
    pub lambda_list: Vec<f64>,
    pub theta: Option<f64>,
    pub replicas: u64,
    pub horizon: f64,
    pub master_seed: u64,
    pub out_path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    /// All defaults for one experiment kind.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            n_list: kind.default_n(),
            lambda_list: kind.default_lambda(),
            theta: None,
            replicas: kind.default_replicas(),
            horizon: kind.default_horizon(),
            master_seed: seed_from_env().unwrap_or(DEFAULT_MASTER_SEED),
            out_path: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.replicas == 0 {
            return Err(HarnessError::Usage("replicas must be at least 1".into()));
        }
        if self.n_list.is_empty() || self.n_list.iter().any(|&n| n == 0) {
            return Err(HarnessError::Usage("every n must be at least 1".into()));
        }
        if self.lambda_list.is_empty()
            || self.lambda_list.iter().any(|&l| !(l > 0.0) || !l.is_finite())
        {
            return Err(HarnessError::Usage("every lambda must be positive".into()));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(HarnessError::Usage("horizon must be positive".into()));
        }
        if let Some(theta) = self.theta {
            if !(theta > 0.0 && theta <= 1.0) {
                return Err(HarnessError::Usage("theta must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }
}

pub fn seed_from_env() -> Option<u64> {
    std::env::var(SEED_ENV_VAR).ok().and_then(|s| s.parse().ok())
}

/// The subset of settings a TOML config file may carry; keys mirror the CLI
/// flag names. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<Vec<u64>>,
    pub lambda: Option<Vec<f64>>,
    pub theta: Option<f64>,
    pub replicas: Option<u64>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&text)
            .map_err(|e| HarnessError::Usage(format!("bad config file {}: {e}", path.display())))
    }

    /// Fill unset fields of `config` from this file (flags have already been
    /// applied on top by the caller applying them afterwards — the merge
    /// order is: defaults, then file, then flags).
    pub fn apply(&self, config: &mut ExperimentConfig) -> Result<(), HarnessError> {
        if let Some(n) = &self.n {
            config.n_list = n.clone();
        }
        if let Some(lambda) = &self.lambda {
            config.lambda_list = lambda.clone();
        }
        if let Some(theta) = self.theta {
            config.theta = Some(theta);
        }
        if let Some(replicas) = self.replicas {
            config.replicas = replicas;
        }
        if let Some(horizon) = self.horizon {
            config.horizon = horizon;
        }
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(out) = &self.out {
            config.out_path = Some(out.clone());
        }
        if let Some(format) = &self.format {
            config.format = OutputFormat::parse(format)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_defaults_are_sane() {
        for kind in [
            ExperimentKind::Sweep,
            ExperimentKind::MeanField,
            ExperimentKind::CouplingAudit,
            ExperimentKind::Lumping,
            ExperimentKind::Aux,
            ExperimentKind::Ode,
        ] {
            let config = ExperimentConfig {
                master_seed: DEFAULT_MASTER_SEED,
                ..ExperimentConfig::new(kind)
            };
            config.validate().unwrap();
        }
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut config = ExperimentConfig::new(ExperimentKind::Sweep);
        config.replicas = 0;
        assert!(config.validate().is_err());

        let mut config = ExperimentConfig::new(ExperimentKind::Sweep);
        config.lambda_list = vec![-1.0];
        assert!(config.validate().is_err());

        let mut config = ExperimentConfig::new(ExperimentKind::Aux);
        config.theta = Some(1.5);
        assert!(config.validate().is_err());
    }

    #[test]
    fn file_config_merges_under_flags() {
        let file: FileConfig = toml::from_str(
            r#"
            n = [10, 20]
            replicas = 7
            format = "json"
            "#,
        )
        .unwrap();
        let mut config = ExperimentConfig::new(ExperimentKind::Sweep);
        file.apply(&mut config).unwrap();
        assert_eq!(config.n_list, vec![10, 20]);
        assert_eq!(config.replicas, 7);
        assert_eq!(config.format, OutputFormat::Json);

        // Unknown keys are rejected.
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }
}
