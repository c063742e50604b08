use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ParamNet, Scalar};
use crate::error::{Error, Result};

pub const NET_FORMAT: &str = "deepcorr.paramnet";
pub const NET_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerRecord {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `rows * cols` entries.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// On-disk form of a [`ParamNet`].
///
/// Numbers go through `serde_json`'s shortest round-trip formatting, so an
/// `f64` network reloads bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetFile {
    pub format: String,
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    pub dueling: bool,
    pub layers: Vec<LayerRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl NetFile {
    pub fn from_net<T: Scalar>(net: &ParamNet<T>) -> Self {
        let to_f64 = |xs: &[T]| xs.iter().map(|x| x.to_f64().expect("float converts")).collect();
        let layers = (0..net.layer_count())
            .map(|l| {
                let (rows, cols) = net.layer_shape(l);
                LayerRecord {
                    rows,
                    cols,
                    weights: to_f64(net.weights(l)),
                    biases: to_f64(net.biases(l)),
                }
            })
            .collect();
        Self {
            format: NET_FORMAT.to_string(),
            version: NET_FORMAT_VERSION,
            layer_sizes: net.layer_sizes().to_vec(),
            dueling: net.dueling(),
            layers,
            metadata: BTreeMap::new(),
        }
    }

    pub fn to_net<T: Scalar>(&self) -> Result<ParamNet<T>> {
        if self.format != NET_FORMAT {
            return Err(Error::Format(format!("unexpected format tag {:?}", self.format)));
        }
        if self.version != NET_FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", self.version)));
        }
        let convert = |xs: &[f64]| -> Result<Vec<T>> {
            xs.iter()
                .map(|&x| T::from_f64(x).ok_or_else(|| Error::Format(format!("value {x} not representable"))))
                .collect()
        };
        let weights = self
            .layers
            .iter()
            .map(|l| convert(&l.weights))
            .collect::<Result<Vec<_>>>()?;
        let biases = self
            .layers
            .iter()
            .map(|l| convert(&l.biases))
            .collect::<Result<Vec<_>>>()?;
        let net = ParamNet::from_layers(&self.layer_sizes, self.dueling, &weights, &biases)?;
        for (l, record) in self.layers.iter().enumerate() {
            if net.layer_shape(l) != (record.rows, record.cols) {
                return Err(Error::Format(format!(
                    "layer {l} declares {}x{} but layer sizes imply {:?}",
                    record.rows,
                    record.cols,
                    net.layer_shape(l)
                )));
            }
        }
        Ok(net)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl<T: Scalar> ParamNet<T> {
    pub fn to_json(&self) -> Result<String> {
        NetFile::from_net(self).to_json()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        NetFile::from_json(text)?.to_net()
    }
}
