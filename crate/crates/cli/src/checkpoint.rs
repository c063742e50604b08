//! Checkpoint files: trained networks plus what is needed to rebuild the
//! policy they define.

use std::path::{Path, PathBuf};

use deepcorr::fusion::FusionRule;
use deepcorr::numerics::NetFile;
use deepcorr::Net;
use serde::{Deserialize, Serialize};

use crate::config::{sha256_hex, Environment, Method, Scope};
use crate::error::{CliError, Result};

pub const CHECKPOINT_FORMAT: &str = "deepcorr.checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// A checkpoint this one depends on. Relative paths resolve against the
/// referencing checkpoint's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointRef {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub environment: Environment,
    pub scope: Scope,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fusion_rule: Option<FusionRule>,
    /// Single-scope network that fusion and correction policies build on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_lo: Option<CheckpointRef>,
    /// Environment steps spent producing `nets`.
    pub env_steps: u64,
    /// `dqn`: one network; `decomposed-dqn`: one per agent; `correction`:
    /// one correction network per agent (fisheries) or one in total
    /// (crosswalk); `fusion`: none.
    pub nets: Vec<NetFile>,
}

impl Checkpoint {
    pub fn new(config_hash: &str, environment: Environment, scope: Scope, method: Method) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            config_hash: config_hash.into(),
            environment,
            scope,
            method,
            fusion_rule: None,
            q_lo: None,
            env_steps: 0,
            nets: Vec::new(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("checkpoint serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |message: String| CliError::Checkpoint {
            path: path.to_path_buf(),
            message,
        };
        let ckpt: Checkpoint = serde_json::from_slice(bytes).map_err(|e| bad(e.to_string()))?;
        if ckpt.format != CHECKPOINT_FORMAT || ckpt.version != CHECKPOINT_VERSION {
            return Err(bad(format!("unsupported format {} v{}", ckpt.format, ckpt.version)));
        }
        Ok(ckpt)
    }

    /// Read a checkpoint and its content hash.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Checkpoint {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok((Self::from_bytes(&bytes, path)?, sha256_hex(&bytes)))
    }

    pub fn networks(&self) -> Result<Vec<Net>> {
        Ok(self.nets.iter().map(NetFile::to_net).collect::<deepcorr::Result<_>>()?)
    }

    /// Load the referenced low-fidelity checkpoint, checking its hash.
    pub fn load_q_lo(&self, own_path: &Path) -> Result<Option<(Checkpoint, PathBuf)>> {
        let Some(r) = &self.q_lo else { return Ok(None) };
        let path = match own_path.parent() {
            Some(dir) if r.path.is_relative() => dir.join(&r.path),
            _ => r.path.clone(),
        };
        let (q_lo, hash) = Checkpoint::load(&path)?;
        if hash != r.sha256 {
            return Err(CliError::Checkpoint {
                path,
                message: format!("content hash {hash} does not match the recorded {}", r.sha256),
            });
        }
        Ok(Some((q_lo, path)))
    }
}
