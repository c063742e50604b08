//! Experiment configuration: one TOML file per run.
//!
//! Every section is optional. Network and exploration settings default to
//! the chosen environment's standard setup; environment parameters default
//! to the standard problem definitions.

use std::path::{Path, PathBuf};

use deepcorr::crosswalk::CrosswalkParams;
use deepcorr::fisheries::FisheriesParams;
use deepcorr::fusion::FusionRule;
use deepcorr::harness::SliceConfig;
use deepcorr::qlearn::DqnConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Environment {
    Fisheries,
    Crosswalk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BaselineFixed,
    BaselineRandom,
    Dqn,
    DecomposedDqn,
    Fusion,
    Correction,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::BaselineFixed => "baseline-fixed",
            Method::BaselineRandom => "baseline-random",
            Method::Dqn => "dqn",
            Method::DecomposedDqn => "decomposed-dqn",
            Method::Fusion => "fusion",
            Method::Correction => "correction",
        }
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, Method::BaselineFixed | Method::BaselineRandom)
    }

    pub fn needs_q_lo(self) -> bool {
        matches!(self, Method::Fusion | Method::Correction)
    }
}

/// Which problem a run works on: the full multi-entity problem or the
/// one-boat / one-pedestrian subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    #[default]
    Global,
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    pub n_sims: usize,
    pub seeds: Vec<u64>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            n_sims: 100,
            seeds: vec![0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub exploration_fraction: f64,
    pub final_epsilon: f64,
}

/// Seeds crossed with exploration schedules; no schedules means the one in `[dqn]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub seeds: Vec<u64>,
    pub schedules: Vec<Schedule>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seeds: vec![0],
            schedules: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: Environment,
    pub method: Method,
    #[serde(default)]
    pub scope: Scope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fusion_rule: Option<FusionRule>,
    /// Action index for `baseline-fixed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_action: Option<usize>,
    /// Single-scope `dqn` checkpoint to fuse; relative paths resolve
    /// against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_lo_checkpoint: Option<PathBuf>,
    /// Steps spent training the single-scope network when no checkpoint is
    /// given. Corrections get the rest of `dqn.total_train_steps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_agent_budget: Option<u64>,
    /// Relative paths resolve against the output root.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub dqn: DqnConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fisheries: Option<FisheriesParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crosswalk: Option<CrosswalkParams>,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub slice: SliceConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("run")
}

impl ExperimentConfig {
    /// Parse and fill environment-dependent defaults. Errors carry the
    /// line and column of the offending key.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        if cfg.environment == Environment::Crosswalk {
            // keys the file leaves out take the crosswalk values, not the fisheries ones
            let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
            let mut merged = toml::Table::try_from(DqnConfig::crosswalk()).map_err(|e| e.to_string())?;
            if let Some(toml::Value::Table(user)) = raw.get("dqn") {
                merged.extend(user.clone());
            }
            cfg.dqn = merged.try_into().map_err(|e: toml::de::Error| e.to_string())?;
        }
        match cfg.environment {
            Environment::Fisheries => {
                if cfg.crosswalk.is_some() {
                    return Err("a [crosswalk] section is not allowed when environment = \"fisheries\"".into());
                }
                cfg.fisheries.get_or_insert_with(FisheriesParams::default);
            }
            Environment::Crosswalk => {
                if cfg.fisheries.is_some() {
                    return Err("a [fisheries] section is not allowed when environment = \"crosswalk\"".into());
                }
                cfg.crosswalk.get_or_insert_with(CrosswalkParams::default);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let cfg = Self::parse(&text).map_err(|message| CliError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML form; parsing it gives back an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        sha256_hex(self.to_toml().as_bytes())
    }

    pub fn fisheries_params(&self) -> &FisheriesParams {
        self.fisheries.as_ref().expect("filled by parse")
    }

    pub fn crosswalk_params(&self) -> &CrosswalkParams {
        self.crosswalk.as_ref().expect("filled by parse")
    }

    /// Steps left for the correction after the single-scope network.
    pub fn correction_budget(&self) -> u64 {
        self.dqn.total_train_steps - self.single_agent_budget.unwrap_or(0)
    }

    /// Number of actions available in the configured scope (per agent for
    /// fisheries).
    pub fn action_count(&self) -> usize {
        match self.environment {
            Environment::Fisheries => self.fisheries_params().local_actions.len(),
            Environment::Crosswalk => self.crosswalk_params().accelerations.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(CliError::Invalid(m));
        self.dqn.validate()?;
        match self.environment {
            Environment::Fisheries => self.fisheries_params().validate()?,
            Environment::Crosswalk => self.crosswalk_params().validate()?,
        }
        if self.evaluation.n_sims == 0 || self.evaluation.seeds.is_empty() {
            return invalid("evaluation needs n_sims >= 1 and at least one seed".into());
        }
        if self.sweep.seeds.is_empty() {
            return invalid("sweep needs at least one seed".into());
        }
        match self.method {
            Method::BaselineFixed => match self.fixed_action {
                None => {
                    return Err(CliError::MissingKey {
                        key: "fixed_action",
                        reason: "baseline-fixed runs need the index of the action to repeat".into(),
                    })
                }
                Some(a) if a >= self.action_count() => {
                    return invalid(format!("fixed_action {a} out of range 0..{}", self.action_count()));
                }
                Some(_) => {}
            },
            Method::Fusion | Method::Correction => {
                let rule = self.fusion_rule.ok_or_else(|| CliError::MissingKey {
                    key: "fusion_rule",
                    reason: format!("{} runs need \"max-sum\" or \"max-min\"", self.method.as_str()),
                })?;
                if self.environment == Environment::Fisheries && rule == FusionRule::MaxMin {
                    return invalid("fisheries joint actions are chosen by max-sum; max-min is crosswalk only".into());
                }
                match (&self.q_lo_checkpoint, self.single_agent_budget) {
                    (None, None) => {
                        return Err(CliError::MissingKey {
                            key: "q_lo_checkpoint",
                            reason: format!(
                                "{} runs need a q_lo_checkpoint or a single_agent_budget to train one",
                                self.method.as_str()
                            ),
                        })
                    }
                    (Some(_), Some(_)) => {
                        return invalid("give either q_lo_checkpoint or single_agent_budget, not both".into());
                    }
                    (None, Some(b)) if b > self.dqn.total_train_steps && self.method == Method::Correction => {
                        return invalid(format!(
                            "single_agent_budget {b} exceeds dqn.total_train_steps {}",
                            self.dqn.total_train_steps
                        ));
                    }
                    _ => {}
                }
            }
            Method::Dqn | Method::DecomposedDqn | Method::BaselineRandom => {}
        }
        if self.scope == Scope::Single && !matches!(self.method, Method::Dqn | Method::BaselineFixed | Method::BaselineRandom) {
            return invalid(format!("scope = \"single\" is only meaningful for dqn and baselines, not {}", self.method.as_str()));
        }
        match (self.environment, self.method, self.scope) {
            (Environment::Fisheries, Method::Dqn, Scope::Global) => {
                invalid("a single network over the joint fisheries action space is not supported; use decomposed-dqn or scope = \"single\"".into())
            }
            (Environment::Crosswalk, Method::DecomposedDqn, _) => {
                invalid("decomposed-dqn needs a multi-agent environment; crosswalk has one agent".into())
            }
            _ => Ok(()),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
