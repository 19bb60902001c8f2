//! Flat TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::emit::Format;
use super::spec::Overrides;

/// ```toml
/// [run]
/// points = 10000000
/// replicas = 20
/// seed = 7
/// windows = 100000
/// full_scale = false
/// workers = 4
///
/// [output]
/// format = "csv"
/// out = "results.csv"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub points: Option<usize>,
    pub replicas: Option<usize>,
    pub seed: Option<u64>,
    pub windows: Option<usize>,
    pub full_scale: Option<bool>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl HarnessConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn overrides(&self) -> Overrides {
        let r = &self.run;
        Overrides {
            points: r.points,
            replicas: r.replicas,
            seed: r.seed,
            windows: r.windows,
            full_scale: r.full_scale.unwrap_or(false),
        }
    }
}

/// Size the global worker pool; a no-op after the first call.
pub fn init_workers(workers: Option<usize>) -> Result<()> {
    let Some(n) = workers else { return Ok(()) };
    if n == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    // The pool can only be built once per process; later calls keep the first size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
