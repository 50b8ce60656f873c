use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use stressuq::{Error, Result};

use crate::config::RunConfig;

pub const FILE_NAME: &str = "manifest.json";

/// Record of one command invocation. Holds no clock or host information so
/// that identical inputs give an identical file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub datasets: Vec<PathBuf>,
    pub mode: Option<String>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub config: RunConfig,
    /// Named scalars and tables produced by the run.
    pub results: Map<String, Value>,
    /// Files written next to the manifest.
    pub outputs: Vec<String>,
    pub error: Option<String>,
}

impl Manifest {
    pub fn new(command: &str, cfg: &RunConfig, config_path: Option<&Path>, out: &Path) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_path: config_path.map(Path::to_path_buf),
            datasets: Vec::new(),
            mode: None,
            output_dir: out.to_path_buf(),
            seed: cfg.seed,
            config: cfg.clone(),
            results: Map::new(),
            outputs: Vec::new(),
            error: None,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.into(), value.into());
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join(FILE_NAME), text + "\n")?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(FILE_NAME);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Data(format!("no manifest at {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.results.get(key).and_then(Value::as_f64)
    }
}
