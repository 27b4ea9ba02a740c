//! Run configuration read from a TOML file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::data::Month;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[serde(alias = "forest")]
    #[value(alias = "forest")]
    Rf,
    #[default]
    Gbm,
}

impl ModelKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            ModelKind::Rf => "forest",
            ModelKind::Gbm => "gbm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Population {
    #[default]
    Full,
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShapMode {
    #[default]
    LeafProduct,
    Enumeration,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub data: DataConfig,
    pub split: SplitConfig,
    pub model: ModelConfig,
    pub forest: ForestSection,
    pub gbm: GbmSection,
    pub explain: ExplainSection,
    pub rules: RulesSection,
    pub lift: LiftSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// Wide CSV with a DATE column and one column per tenor.
    pub yields: Option<PathBuf>,
    /// Monthly 0/1 recession indicator CSV.
    pub recession: Option<PathBuf>,
    /// Series download endpoint used when `yields` or `recession` is absent.
    pub endpoint: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub recession_series: String,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { yields: None, recession: None, endpoint: None, cache_dir: None, recession_series: "USREC".into() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub train_start: Month,
    pub train_end: Month,
    pub test_start: Month,
    pub test_end: Month,
}

impl Default for SplitConfig {
    fn default() -> Self {
        let m = |y, mo| Month::new(y, mo).expect("valid month");
        Self { train_start: m(1970, 1), train_end: m(1999, 12), test_start: m(2000, 1), test_end: m(2020, 11) }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub seed: Option<u64>,
    pub threshold: f64,
    /// Model file for explain, rules and lift; defaults to the trained model in the output directory.
    pub file: Option<PathBuf>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { kind: ModelKind::Gbm, seed: None, threshold: 0.5, file: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestSection {
    pub n_trees: usize,
    pub mtry: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    pub hard_vote: bool,
}

impl Default for ForestSection {
    fn default() -> Self {
        Self { n_trees: 500, mtry: 6, max_depth: 12, min_samples_leaf: 5, bootstrap: true, hard_vote: false }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GbmSection {
    pub n_stages: usize,
    pub nu: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub mtry: usize,
    pub newton: bool,
    pub lambda: f64,
}

impl Default for GbmSection {
    fn default() -> Self {
        Self { n_stages: 300, nu: 0.1, max_depth: 6, min_samples_leaf: 5, mtry: 36, newton: false, lambda: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExplainSection {
    pub top_k: usize,
    pub algorithm: ShapMode,
    pub enumeration_cap: usize,
    pub svg: bool,
}

impl Default for ExplainSection {
    fn default() -> Self {
        Self { top_k: 6, algorithm: ShapMode::LeafProduct, enumeration_cap: 20, svg: true }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RulesSection {
    pub top_k: usize,
    /// Keep only rules with a condition on a top SHAP feature before ranking.
    pub shap_filter: bool,
    pub shap_top: usize,
    pub population: Population,
}

impl Default for RulesSection {
    fn default() -> Self {
        Self { top_k: 5, shap_filter: true, shap_top: 6, population: Population::Full }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct LiftSection {
    pub population: Population,
    pub features: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Makes relative paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.data.yields, &mut self.data.recession, &mut self.data.cache_dir, &mut self.model.file]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut self.output.dir);
    }
}
