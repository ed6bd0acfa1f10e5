use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use scvs_core::mpe::DEFAULT_K;
use scvs_core::nn::{family_shape, Activation, TrainConfig};
use scvs_core::sc::LfsrConfig;
use scvs_core::sc_nn::QuantizeOptions;
use scvs_core::screening::SplitSpec;
use serde::{Deserialize, Serialize};

use crate::exit::Invalid;

pub const MIN_SC_WIDTH: u32 = 4;
pub const MAX_SC_WIDTH: u32 = 16;

/// Environment variables that may override paths, and only paths.
pub const ENV_MANIFEST: &str = "SCVS_MANIFEST";
pub const ENV_MODELS: &str = "SCVS_MODELS_DIR";
pub const ENV_REPORTS: &str = "SCVS_REPORTS_DIR";
pub const ENV_SCALER: &str = "SCVS_SCALER";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub manifest: Option<PathBuf>,
    pub models: PathBuf,
    pub reports: PathBuf,
    /// Feature scaler; defaults to `scaler.json` in the models directory.
    pub scaler: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self { manifest: None, models: "models".into(), reports: "reports".into(), scaler: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LfsrParams {
    pub taps: u32,
    pub seed: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScParams {
    pub width: u32,
    /// Defaults to one full LFSR period, `2^width - 1`.
    pub stream_len: Option<usize>,
    /// Defaults to the built-in register pair for the width.
    pub lfsr1: Option<LfsrParams>,
    pub lfsr2: Option<LfsrParams>,
    pub clip_quantile: f64,
    pub bias: bool,
}

impl Default for ScParams {
    fn default() -> Self {
        Self { width: 12, stream_len: None, lfsr1: None, lfsr2: None, clip_quantile: 0.9, bias: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// First hidden layer of the model family: 12, 24, 48, 64 or 256.
    pub arch: usize,
    pub activation: Activation,
    pub init_seed: u64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { arch: 64, activation: Activation::Tanh, init_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub split: SplitSpec,
    pub train: TrainConfig,
    pub model: ModelParams,
    pub sc: ScParams,
    /// Coulomb constant of the pairing energy.
    pub k: f64,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            split: SplitSpec::default(),
            train: TrainConfig::default(),
            model: ModelParams::default(),
            sc: ScParams::default(),
            k: DEFAULT_K,
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).map_err(|e| Invalid(format!("config {}: {e}", path.display())).into())
    }

    /// Path overrides from the environment.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(v) = lookup(ENV_MANIFEST) {
            self.paths.manifest = Some(v.into());
        }
        if let Some(v) = lookup(ENV_MODELS) {
            self.paths.models = v.into();
        }
        if let Some(v) = lookup(ENV_REPORTS) {
            self.paths.reports = v.into();
        }
        if let Some(v) = lookup(ENV_SCALER) {
            self.paths.scaler = Some(v.into());
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| -> Result<()> { Err(Invalid(m).into()) };
        if !(MIN_SC_WIDTH..=MAX_SC_WIDTH).contains(&self.sc.width) {
            return bad(format!("sc.width {} outside {MIN_SC_WIDTH}..={MAX_SC_WIDTH}", self.sc.width));
        }
        if self.sc.stream_len == Some(0) {
            return bad("sc.stream_len must be at least 1".into());
        }
        if !(self.sc.clip_quantile > 0.0 && self.sc.clip_quantile <= 1.0) {
            return bad(format!("sc.clip_quantile {} outside (0, 1]", self.sc.clip_quantile));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return bad(format!("k must be finite and positive, got {}", self.k));
        }
        if ![12, 24, 48, 64, 256].contains(&self.model.arch) {
            return bad(format!("model.arch {} is not one of 12, 24, 48, 64, 256", self.model.arch));
        }
        self.split.validate().map_err(|e| Invalid(e.to_string()))?;
        self.train.validate().map_err(|e| Invalid(e.to_string()))?;
        self.quantize_options()?;
        Ok(())
    }

    pub fn shape(&self) -> Vec<usize> {
        family_shape(self.model.arch)
    }

    pub fn quantize_options(&self) -> Result<QuantizeOptions> {
        let mut opts = QuantizeOptions::for_width(self.sc.width).map_err(|e| Invalid(e.to_string()))?;
        let register = |p: LfsrParams| LfsrConfig::new(self.sc.width, p.taps, p.seed).map_err(|e| Invalid(e.to_string()));
        if let Some(p) = self.sc.lfsr1 {
            opts.lfsr1 = register(p)?;
        }
        if let Some(p) = self.sc.lfsr2 {
            opts.lfsr2 = register(p)?;
        }
        if let Some(n) = self.sc.stream_len {
            opts.stream_len = n;
        }
        opts.clip_quantile = self.sc.clip_quantile;
        opts.bias = self.sc.bias;
        Ok(opts)
    }

    pub fn manifest(&self) -> Result<&Path> {
        match &self.paths.manifest {
            Some(p) => Ok(p),
            None => bail!(Invalid("no manifest given (--manifest, paths.manifest or SCVS_MANIFEST)".into())),
        }
    }

    pub fn scaler_path(&self) -> PathBuf {
        self.paths.scaler.clone().unwrap_or_else(|| self.paths.models.join("scaler.json"))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
