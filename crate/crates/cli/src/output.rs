use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use mrds::GridField64;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::args::Format;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ConfigRef {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce one command run.
#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<ConfigRef>,
    pub seed: u64,
    pub window: Option<[f64; 4]>,
    pub resolution: Option<[usize; 2]>,
    pub params: Map<String, Value>,
    pub escape_radius: Option<f64>,
    pub wall_time_s: f64,
    pub out_of_window: usize,
    pub version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            config: None,
            seed,
            window: None,
            resolution: None,
            params: Map::new(),
            escape_radius: None,
            wall_time_s: 0.0,
            out_of_window: 0,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory that records every file it writes, in write order.
pub struct OutputDir {
    root: PathBuf,
    format: Format,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutputDir { root: root.to_path_buf(), format, written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_with(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let path = self.root.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        body(&mut out).and_then(|_| out.flush()).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// `<stem>.pgm` and/or `<stem>.csv` depending on the format.
    pub fn write_field(&mut self, stem: &str, field: &GridField64, maxval: u16) -> Result<()> {
        if self.format.pgm() {
            let comments = [format!("{stem} ({MANIFEST_FILE})")];
            self.write_with(&format!("{stem}.pgm"), |w| field.write_pgm(w, maxval, &comments))?;
        }
        if self.format.csv() {
            self.write_with(&format!("{stem}.csv"), |w| field.write_csv(w))?;
        }
        Ok(())
    }

    pub fn finish(mut self, mut manifest: RunManifest, elapsed: Duration) -> Result<RunManifest> {
        manifest.wall_time_s = elapsed.as_secs_f64();
        manifest.outputs = std::mem::take(&mut self.written);
        let text = serde_json::to_string_pretty(&manifest)?;
        self.write_with(MANIFEST_FILE, |w| writeln!(w, "{text}"))?;
        Ok(manifest)
    }
}
