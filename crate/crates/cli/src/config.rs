use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use genscope::{ForestConfig, KSelectionMethod, NormalizationScheme, TargetTransform};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KSelectionConfig {
    pub method: Option<KSelectionMethod>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub fixed_k: Option<usize>,
}

impl KSelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fixed_k.is_some() && (self.k_min.is_some() || self.k_max.is_some()) {
            bail!("fixed_k and k_min/k_max are mutually exclusive");
        }
        if let Some(k) = self.fixed_k {
            if k < 2 {
                bail!("k must be ≥ 2 (got {k})");
            }
        }
        if let Some(k) = self.k_min {
            if k < 2 {
                bail!("k must be ≥ 2 (k_min = {k})");
            }
        }
        if let (Some(lo), Some(hi)) = (self.k_min, self.k_max) {
            if lo >= hi {
                bail!("k_min ({lo}) must be below k_max ({hi})");
            }
        }
        Ok(())
    }

    pub fn method(&self) -> KSelectionMethod {
        self.method.unwrap_or(KSelectionMethod::Silhouette)
    }
}

/// One auditable record of a `pipeline` run. Relative paths are resolved
/// against the directory holding the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub features: Option<PathBuf>,
    pub performance: Option<PathBuf>,
    #[serde(default)]
    pub algorithm: Option<String>,
    #[serde(default)]
    pub target_transform: TargetTransform,
    #[serde(default = "yes")]
    pub normalize: bool,
    #[serde(default)]
    pub normalization_scheme: NormalizationScheme,
    #[serde(default)]
    pub k_selection: KSelectionConfig,
    #[serde(default)]
    pub forest: ForestConfig,
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            features: None,
            performance: None,
            algorithm: None,
            target_transform: TargetTransform::Raw,
            normalize: true,
            normalization_scheme: NormalizationScheme::ZScore,
            k_selection: KSelectionConfig::default(),
            forest: ForestConfig::default(),
            seed: None,
            output_dir: None,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config: PipelineConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.features, &mut config.performance, &mut config.output_dir]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    /// The config after flag overrides, checked for completeness.
    pub fn validate(&self) -> Result<()> {
        if self.features.is_none() {
            bail!("no features path (set `features` in the config or pass --features)");
        }
        if self.performance.is_none() {
            bail!("no performance path (set `performance` in the config or pass --performance)");
        }
        if self.seed.is_none() {
            bail!("no seed (set `seed` in the config or pass --seed)");
        }
        if self.output_dir.is_none() {
            bail!("no output directory (set `output_dir` in the config or pass --out)");
        }
        self.k_selection.validate()?;
        self.forest.validate()?;
        Ok(())
    }
}
