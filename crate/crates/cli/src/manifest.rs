use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use fiedler_core::graph::RNG_ALGORITHM;
use serde::Serialize;

/// Provenance record written next to each output as `<output>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub input: Option<PathBuf>,
    /// Seed vertex labels.
    pub seeds: Vec<i64>,
    pub rng_seeds: Vec<u64>,
    pub rng_algorithm: &'static str,
    pub parameters: serde_json::Value,
    pub version: &'static str,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            input: None,
            seeds: Vec::new(),
            rng_seeds: Vec::new(),
            rng_algorithm: RNG_ALGORITHM,
            parameters: serde_json::Value::Null,
            version: env!("CARGO_PKG_VERSION"),
            outputs: Vec::new(),
        }
    }

    pub fn params(&mut self, p: serde_json::Value) {
        self.parameters = p;
    }

    pub fn out(&mut self, path: Option<&Path>) {
        if let Some(p) = path {
            self.outputs.push(p.to_path_buf());
        }
    }

    /// Writes the manifest beside the first output; stdout-only runs have none.
    pub fn write(&self) -> anyhow::Result<()> {
        if let Some(first) = self.outputs.first() {
            let mut name = first.as_os_str().to_owned();
            name.push(".manifest.json");
            let w = BufWriter::new(File::create(PathBuf::from(name))?);
            serde_json::to_writer_pretty(w, self)?;
        }
        Ok(())
    }
}
