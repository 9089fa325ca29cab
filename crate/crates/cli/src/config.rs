use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use posmild::models::ModelConfig;
use posmild::solver::{CsvColumns, SolverConfig};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default)]
pub struct CertifySection {
    /// Ball radius; defaults to twice the initial-state norm.
    pub m: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    pub columns: CsvColumns,
    pub trajectory: String,
    pub metadata: String,
    pub report: String,
    pub convergence: String,
    pub error: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            columns: CsvColumns::Full,
            trajectory: "trajectory.csv".into(),
            metadata: "metadata.json".into(),
            report: "certification.json".into(),
            convergence: "convergence.csv".into(),
            error: "error.json".into(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default)]
pub struct ConvergenceSection {
    pub benchmark: Option<String>,
    pub ladder: Option<Vec<usize>>,
}

/// Sections shared by every verb; the model part is parsed separately.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default)]
pub struct RunSections {
    pub certify: CertifySection,
    pub solver: SolverConfig,
    pub output: OutputSection,
    pub convergence: ConvergenceSection,
}

pub struct Config {
    pub text: String,
    pub dir: PathBuf,
    pub run: RunSections,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let run: RunSections = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { text, dir, run })
    }

    pub fn model(&self) -> Result<ModelConfig> {
        let table: toml::Table = toml::from_str(&self.text)?;
        if !table.contains_key("model") {
            bail!("config does not name a `model`");
        }
        Ok(ModelConfig::from_toml(&self.text)?.with_base_dir(&self.dir))
    }

    /// Applies a command-line seed to both certification paths.
    pub fn override_seed(&mut self, seed: Option<u64>) {
        if let Some(s) = seed {
            self.run.certify.seed = Some(s);
            self.run.solver.certify.seed = s;
        }
    }
}

pub fn require(path: Option<&Path>) -> Result<&Path> {
    path.context("this command needs --config <path>")
}
