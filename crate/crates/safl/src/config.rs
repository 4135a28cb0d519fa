//! Model, loss, and training configuration.
//!
//! Configuration is one TOML document with `[model]` and `[train]` tables.
//! Every field has a default, so a file (or CLI override) only needs to name
//! what it changes. Overrides use dotted keys (`loss.gamma=2`) and are applied
//! after the file; unknown keys fail loudly.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Loss family selector: focal loss or the negative log-likelihood baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossFamily {
    Focal,
    Nll,
}

impl FromStr for LossFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "focal" => Ok(LossFamily::Focal),
            "nll" => Ok(LossFamily::Nll),
            other => Err(Error::Config(format!("unknown loss family {other:?}"))),
        }
    }
}

/// Parameters of the training objective.
///
/// `alpha` and `gamma` are ignored when `family` is [`LossFamily::Nll`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    pub family: LossFamily,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            family: LossFamily::Focal,
            alpha: 1.0,
            gamma: 2.0,
        }
    }
}

impl LossConfig {
    pub fn nll() -> Self {
        Self {
            family: LossFamily::Nll,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma < 0.0 {
            return Err(Error::Config(format!("loss.gamma must be >= 0, got {}", self.gamma)));
        }
        if self.alpha <= 0.0 {
            return Err(Error::Config(format!("loss.alpha must be > 0, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Rectification stage geometry and localization-network widths.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RectifierConfig {
    pub enabled: bool,
    /// Number of fiducial control points K (half on the top band, half on the bottom).
    pub control_points: usize,
    /// Input size fed to the localization network.
    pub input_height: usize,
    pub input_width: usize,
    /// Rectified output size (also the backbone input size).
    pub output_height: usize,
    pub output_width: usize,
    /// Output channels of the six 3x3 localization conv layers.
    pub conv_channels: Vec<usize>,
    /// Width of the first fully-connected layer.
    pub fc_hidden: usize,
    /// Ridge added to the TPS kernel block.
    pub regularization: f64,
}

impl Default for RectifierConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            control_points: 20,
            input_height: 64,
            input_width: 256,
            output_height: 32,
            output_width: 100,
            conv_channels: vec![4, 8, 8, 16, 16, 16],
            fc_hidden: 64,
            regularization: 1e-6,
        }
    }
}

/// Residual feature-extraction network widths.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BackboneConfig {
    /// Channels of the stem 3x3 convolution.
    pub stem_channels: usize,
    /// Channels of the five residual blocks; the last equals `d_model`.
    pub block_channels: Vec<usize>,
    /// Residual units per block.
    pub units_per_block: usize,
}

impl Default for BackboneConfig {
    fn default() -> Self {
        Self {
            stem_channels: 8,
            block_channels: vec![8, 16, 16, 32, 64],
            units_per_block: 1,
        }
    }
}

/// Full model architecture. The default is a desk-scale configuration small
/// enough to train on one CPU core; [`ModelConfig::paper`] is the full-width
/// configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Input image channels.
    pub channels: usize,
    pub rectifier: RectifierConfig,
    pub backbone: BackboneConfig,
    /// Feature and embedding dimension.
    pub d_model: usize,
    /// Attention heads; per-head width is `d_model / heads`.
    pub heads: usize,
    /// Inner width of the position-wise feed-forward layers.
    pub d_ff: usize,
    pub encoder_blocks: usize,
    pub decoder_blocks: usize,
    /// Dropout rate after attention and feed-forward sublayers (training only).
    pub dropout: f64,
    /// Greedy-decode length cap.
    pub max_len: usize,
    /// Rows in the positional-encoding table.
    pub pe_max_len: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::toy()
    }
}

impl ModelConfig {
    /// Reduced-width configuration for CPU-scale experiments.
    pub fn toy() -> Self {
        Self {
            channels: 3,
            rectifier: RectifierConfig::default(),
            backbone: BackboneConfig::default(),
            d_model: 64,
            heads: 4,
            d_ff: 128,
            encoder_blocks: 2,
            decoder_blocks: 2,
            dropout: 0.0,
            max_len: 16,
            pe_max_len: 64,
        }
    }

    /// Full-width configuration: 512-channel features, 8 heads, 4+4 blocks,
    /// 2048-wide feed-forward, K=20 control points, 3 residual units per block.
    pub fn paper() -> Self {
        Self {
            channels: 3,
            rectifier: RectifierConfig {
                enabled: true,
                control_points: 20,
                input_height: 64,
                input_width: 256,
                output_height: 32,
                output_width: 100,
                conv_channels: vec![32, 64, 128, 256, 256, 256],
                fc_hidden: 512,
                regularization: 1e-6,
            },
            backbone: BackboneConfig {
                stem_channels: 32,
                block_channels: vec![32, 64, 128, 256, 512],
                units_per_block: 3,
            },
            d_model: 512,
            heads: 8,
            d_ff: 2048,
            encoder_blocks: 4,
            decoder_blocks: 4,
            dropout: 0.1,
            max_len: 30,
            pe_max_len: 1000,
        }
    }

    /// Per-head key/value width.
    pub fn d_k(&self) -> usize {
        self.d_model / self.heads
    }

    /// Length of the feature sequence the backbone emits.
    pub fn sequence_len(&self) -> usize {
        // two 2x2 strides halve the width twice; the 2x1 strides keep it
        self.rectifier.output_width / 4
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.rectifier;
        if r.control_points < 3 || r.control_points % 2 != 0 {
            return Err(Error::Config(format!(
                "rectifier.control_points must be even and >= 4, got {}",
                r.control_points
            )));
        }
        if r.conv_channels.len() != 6 {
            return Err(Error::Config(format!(
                "rectifier.conv_channels must list 6 layers, got {}",
                r.conv_channels.len()
            )));
        }
        // six 2x2 poolings
        if r.input_height % 64 != 0 || r.input_width % 64 != 0 {
            return Err(Error::Config(format!(
                "rectifier input size {}x{} must be divisible by 64",
                r.input_height, r.input_width
            )));
        }
        if r.output_height % 8 != 0 || r.output_width % 4 != 0 {
            return Err(Error::Config(format!(
                "rectified size {}x{} must be divisible by 8x4",
                r.output_height, r.output_width
            )));
        }
        if r.regularization <= 0.0 {
            return Err(Error::Config("rectifier.regularization must be > 0".into()));
        }
        if self.backbone.block_channels.len() != 5 {
            return Err(Error::Config(format!(
                "backbone.block_channels must list 5 blocks, got {}",
                self.backbone.block_channels.len()
            )));
        }
        if self.backbone.units_per_block == 0 {
            return Err(Error::Config("backbone.units_per_block must be >= 1".into()));
        }
        if self.backbone.block_channels[4] != self.d_model {
            return Err(Error::Config(format!(
                "backbone.block_channels[4] ({}) must equal d_model ({})",
                self.backbone.block_channels[4], self.d_model
            )));
        }
        if self.d_model % 2 != 0 {
            return Err(Error::Config(format!("d_model must be even, got {}", self.d_model)));
        }
        if self.heads == 0 || self.d_model % self.heads != 0 {
            return Err(Error::Config(format!(
                "heads ({}) must divide d_model ({})",
                self.heads, self.d_model
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout must be in [0, 1), got {}", self.dropout)));
        }
        if self.max_len == 0 {
            return Err(Error::Config("max_len must be >= 1".into()));
        }
        if self.pe_max_len < self.sequence_len() || self.pe_max_len < self.max_len + 1 {
            return Err(Error::Config(format!(
                "pe_max_len ({}) must cover the feature sequence ({}) and max_len + 1 ({})",
                self.pe_max_len,
                self.sequence_len(),
                self.max_len + 1
            )));
        }
        Ok(())
    }
}

/// Training-loop settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_steps: usize,
    pub loss: LossConfig,
    /// When false the rectifier is replaced by the plain resize.
    pub rectification_enabled: bool,
    /// Single seed for weight init, batching, and dropout.
    pub seed: u64,
    /// Validation cadence in steps; 0 evaluates only at the end.
    pub eval_every: usize,
    /// Global-norm gradient clip; 0 disables clipping.
    pub grad_clip: f64,
    /// Where checkpoints, logs, and reports are written.
    pub output_dir: PathBuf,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.00002,
            batch_size: 32,
            max_steps: 2000,
            loss: LossConfig::default(),
            rectification_enabled: true,
            seed: 0,
            eval_every: 500,
            grad_clip: 5.0,
            output_dir: PathBuf::from("runs/default"),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::Config(format!(
                "train.learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("train.max_steps must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("train.batch_size must be >= 1".into()));
        }
        if self.grad_clip < 0.0 {
            return Err(Error::Config("train.grad_clip must be >= 0".into()));
        }
        self.loss.validate()
    }
}

/// The whole configuration document: `[model]` plus `[train]`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train.validate()
    }

    /// Load a config: defaults, then the optional file, then dotted overrides.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut tree = toml::Value::try_from(Self::default())
            .map_err(|e| Error::Config(format!("cannot serialize defaults: {e}")))?;
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
            let file: toml::Value = text
                .parse()
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            merge_into(&mut tree, &file, "")?;
        }
        for (key, value) in overrides {
            apply_override(&mut tree, key, value)?;
        }
        let cfg: ExperimentConfig = tree
            .try_into()
            .map_err(|e| Error::Config(format!("invalid configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The effective configuration as a TOML document.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Merge `src` into `dst`, requiring every `src` key to already exist in `dst`.
fn merge_into(dst: &mut toml::Value, src: &toml::Value, path: &str) -> Result<()> {
    match (dst, src) {
        (toml::Value::Table(d), toml::Value::Table(s)) => {
            for (k, v) in s {
                let child_path = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match d.get_mut(k) {
                    Some(slot) => merge_into(slot, v, &child_path)?,
                    None => return Err(Error::Config(format!("unknown config key: {child_path}"))),
                }
            }
            Ok(())
        }
        (slot, value) => {
            *slot = value.clone();
            Ok(())
        }
    }
}

/// Apply one `dotted.key=value` override to a config tree.
pub fn apply_override(tree: &mut toml::Value, dotted: &str, raw: &str) -> Result<()> {
    let mut slot = tree;
    for part in dotted.split('.') {
        slot = match slot {
            toml::Value::Table(t) => t
                .get_mut(part)
                .ok_or_else(|| Error::Config(format!("unknown config key: {dotted}")))?,
            _ => return Err(Error::Config(format!("unknown config key: {dotted}"))),
        };
    }
    *slot = parse_override_value(raw, slot)
        .ok_or_else(|| Error::Config(format!("cannot parse {raw:?} for key {dotted}")))?;
    Ok(())
}

fn parse_override_value(raw: &str, existing: &toml::Value) -> Option<toml::Value> {
    // Parse with TOML syntax so arrays and quoted strings work; bare words
    // fall back to strings when the field is a string.
    let parsed = format!("x = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("x"));
    match existing {
        toml::Value::String(_) => match parsed {
            Some(toml::Value::String(s)) => Some(toml::Value::String(s)),
            _ => Some(toml::Value::String(raw.to_string())),
        },
        toml::Value::Float(_) => match parsed {
            Some(toml::Value::Float(f)) => Some(toml::Value::Float(f)),
            Some(toml::Value::Integer(i)) => Some(toml::Value::Float(i as f64)),
            _ => None,
        },
        toml::Value::Integer(_) => match parsed {
            Some(toml::Value::Integer(i)) => Some(toml::Value::Integer(i)),
            _ => None,
        },
        toml::Value::Boolean(_) => match parsed {
            Some(toml::Value::Boolean(b)) => Some(toml::Value::Boolean(b)),
            _ => None,
        },
        _ => parsed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        ModelConfig::toy().validate().unwrap();
        ModelConfig::paper().validate().unwrap();
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn paper_dimensions() {
        let m = ModelConfig::paper();
        assert_eq!(m.d_model, 512);
        assert_eq!(m.d_k(), 64);
        assert_eq!(m.sequence_len(), 25);
        assert_eq!(m.rectifier.control_points, 20);
    }

    #[test]
    fn invalid_heads_rejected() {
        let mut m = ModelConfig::toy();
        m.heads = 5;
        assert!(m.validate().is_err());
    }

    #[test]
    fn overrides_apply_and_unknown_keys_fail() {
        let cfg = ExperimentConfig::load(
            None,
            &[
                ("train.loss.family".into(), "nll".into()),
                ("train.loss.gamma".into(), "0".into()),
                ("train.max_steps".into(), "7".into()),
            ],
        )
        .unwrap();
        assert_eq!(cfg.train.loss.family, LossFamily::Nll);
        assert_eq!(cfg.train.loss.gamma, 0.0);
        assert_eq!(cfg.train.max_steps, 7);

        let err = ExperimentConfig::load(None, &[("foo".into(), "1".into())]).unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
        let err =
            ExperimentConfig::load(None, &[("train.loss.banana".into(), "1".into())]).unwrap_err();
        assert!(err.to_string().contains("train.loss.banana"), "{err}");
    }

    #[test]
    fn file_merge_checks_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "[train]\nmax_steps = 3\n").unwrap();
        let cfg = ExperimentConfig::load(Some(&path), &[]).unwrap();
        assert_eq!(cfg.train.max_steps, 3);

        std::fs::write(&path, "[train]\nmax_stepz = 3\n").unwrap();
        let err = ExperimentConfig::load(Some(&path), &[]).unwrap_err();
        assert!(err.to_string().contains("train.max_stepz"), "{err}");
    }

    #[test]
    fn effective_config_round_trips() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml_string();
        let tree: toml::Value = text.parse().unwrap();
        let back: ExperimentConfig = tree.try_into().unwrap();
        assert_eq!(back.train.batch_size, cfg.train.batch_size);
        assert_eq!(back.model.d_model, cfg.model.d_model);
    }
}
