//! Pipeline configuration: a JSON document whose paths are resolved
//! relative to the config file's own directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use corana::tabulate::VocabPolicy;
use corana::Axis;
use serde::Deserialize;

use crate::error::CliError;

/// Where the active table comes from.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    /// Raw script text; scenes are split and tokenized.
    Script(PathBuf),
    /// A ready-made table CSV.
    Table(PathBuf),
}

/// Which coordinates feed the sequence clustering.
#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ClusterInput {
    /// Full-dimensional factor coordinates.
    #[default]
    Factors,
    /// Signed cosines with the factor axes (orientation only).
    Correlations,
}

/// Scene marker settings; `patterns` of `None` keeps the defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkerSettings {
    pub patterns: Option<Vec<String>>,
    pub allcaps_headings: Option<bool>,
    pub strict: bool,
}

impl MarkerSettings {
    pub fn to_marker_config(&self) -> Result<corana::tabulate::MarkerConfig, CliError> {
        let mut config = match &self.patterns {
            Some(patterns) => corana::tabulate::MarkerConfig::from_patterns(
                patterns,
                self.allcaps_headings.unwrap_or(false),
                self.strict,
            )
            .map_err(|e| CliError::from_table("config", e))?,
            None => corana::tabulate::MarkerConfig::default(),
        };
        if let Some(allcaps) = self.allcaps_headings {
            config.allcaps_headings = allcaps;
        }
        config.strict = self.strict;
        Ok(config)
    }
}

/// Label aggregation applied to the active table before analysis: either an
/// inline `map` or a JSON `file` of `label: group` pairs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupingSettings {
    pub axis: Axis,
    #[serde(default)]
    pub map: BTreeMap<String, String>,
    #[serde(default)]
    pub file: Option<PathBuf>,
}

fn default_caesuras() -> usize {
    3
}

fn default_trials() -> u32 {
    999
}

fn default_plot_factors() -> [usize; 2] {
    [1, 2]
}

fn default_label_limit() -> usize {
    40
}

/// Everything `pipeline` needs. Unknown keys are rejected so typos fail
/// loudly instead of silently disabling a stage.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputSource,
    #[serde(default)]
    pub markers: MarkerSettings,
    #[serde(default)]
    pub vocab: VocabPolicy,
    /// JSON file of attribute specs; when set, the active table crosses
    /// scenes by these attributes instead of by words.
    #[serde(default)]
    pub attributes: Option<PathBuf>,
    #[serde(default)]
    pub grouping: Option<GroupingSettings>,
    /// Table CSV of supplementary rows (same columns as the active table).
    #[serde(default)]
    pub supplementary_rows: Option<PathBuf>,
    /// Table CSV of supplementary columns (same rows as the active table).
    #[serde(default)]
    pub supplementary_columns: Option<PathBuf>,
    /// Two-column CSV `label,value` sizing the row glyphs in the plane plot.
    #[serde(default)]
    pub overlay: Option<PathBuf>,
    #[serde(default)]
    pub cluster_input: ClusterInput,
    /// How many caesuras to report (clamped to the boundary count).
    #[serde(default = "default_caesuras")]
    pub caesuras: usize,
    /// Monte Carlo trials; 0 skips the style test.
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub seed: u64,
    /// 1-based factor pair for the plane plot.
    #[serde(default = "default_plot_factors")]
    pub plot_factors: [usize; 2],
    #[serde(default = "default_label_limit")]
    pub label_limit: usize,
    /// Output directory; `--out` overrides it.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl PipelineConfig {
    /// Load a config file and resolve every relative path against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input("config", format!("{}: {e}", path.display())))?;
        let mut config: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::input("config", format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        match &mut self.input {
            InputSource::Script(p) | InputSource::Table(p) => resolve(p),
        }
        if let Some(p) = self.attributes.as_mut() {
            resolve(p);
        }
        if let Some(g) = self.grouping.as_mut() {
            if let Some(p) = g.file.as_mut() {
                resolve(p);
            }
        }
        for opt in [
            self.supplementary_rows.as_mut(),
            self.supplementary_columns.as_mut(),
            self.overlay.as_mut(),
            self.out_dir.as_mut(),
        ]
        .into_iter()
        .flatten()
        {
            resolve(opt);
        }
    }
}
