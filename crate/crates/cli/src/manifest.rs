use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use crate::io::{digest, write_json, FileDigest};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: String) -> Check {
        Check { name: name.to_string(), pass, detail }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub version: String,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_time_s: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Collects what a run reads and writes, then seals it into a manifest.
pub struct Recorder {
    start: Instant,
    pub dir: PathBuf,
    pub seeds: Vec<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    pub checks: Vec<Check>,
}

impl Recorder {
    pub fn new(dir: &Path) -> Result<Recorder> {
        std::fs::create_dir_all(dir)?;
        Ok(Recorder {
            start: Instant::now(),
            dir: dir.to_path_buf(),
            seeds: vec![],
            inputs: vec![],
            outputs: vec![],
            checks: vec![],
        })
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    /// Path of a new artifact inside the run directory.
    pub fn output(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.outputs.push(p.clone());
        p
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn finish(self, config: BTreeMap<String, String>) -> Result<RunManifest> {
        let manifest = RunManifest {
            command_line: std::env::args().collect(),
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seeds: self.seeds,
            inputs: self.inputs.iter().map(|p| digest(p)).collect::<Result<_>>()?,
            outputs: self.outputs.iter().map(|p| digest(p)).collect::<Result<_>>()?,
            wall_time_s: self.start.elapsed().as_secs_f64(),
            pass: self.checks.iter().all(|c| c.pass),
            checks: self.checks,
        };
        write_json(&self.dir.join("manifest.json"), &manifest)?;
        Ok(manifest)
    }
}
