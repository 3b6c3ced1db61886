//! Plain `key = value` configuration with `#` comments.
//!
//! Every lookup records the value actually used, defaults included, so the
//! manifest always shows the full effective configuration.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};

use crate::Usage;

#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeMap<String, String>>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                Config::parse(&text)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Usage(format!("config line {}: expected key = value", no + 1)).into());
            };
            let key = k.trim().to_string();
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Usage(format!("config line {}: duplicate key {key}", no + 1)).into());
            }
        }
        Ok(Config { values, used: RefCell::default() })
    }

    pub fn get<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
    {
        let v = match self.values.get(key) {
            Some(raw) => raw.parse::<T>().map_err(|_| Usage(format!("config key {key}: cannot parse {raw:?}")))?,
            None => default,
        };
        self.used.borrow_mut().insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// Comma-separated list of numbers.
    pub fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let v = match self.values.get(key) {
            Some(raw) => parse_list(raw).map_err(|_| Usage(format!("config key {key}: bad list {raw:?}")))?,
            None => default.to_vec(),
        };
        let shown = v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        self.used.borrow_mut().insert(key.to_string(), shown);
        Ok(v)
    }

    pub fn snapshot(&self) -> BTreeMap<String, String> {
        self.used.borrow().clone()
    }

    /// Keys present in the file that no lookup asked for.
    pub fn unused(&self) -> Vec<String> {
        let used = self.used.borrow();
        self.values.keys().filter(|k| !used.contains_key(*k)).cloned().collect()
    }
}

pub fn parse_list(raw: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    raw.split(',').map(|x| x.trim().parse::<f64>()).collect()
}
