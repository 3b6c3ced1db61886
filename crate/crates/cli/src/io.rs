//! Curve and function files, digests.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fracwill::curve::{resample_arclength, support_to_curve};
use fracwill::{ArcCurve, Domain, GridFunction, Point, SupportCurve};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Arc,
    Support,
    Polyline,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CurveFile {
    pub kind: CurveKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<(usize, f64, f64)>>,
    #[serde(default = "yes")]
    pub closed: bool,
}

fn yes() -> bool {
    true
}

impl CurveFile {
    pub fn support(sc: &SupportCurve) -> CurveFile {
        CurveFile { kind: CurveKind::Support, nodes: None, a0: Some(sc.a0), coeffs: Some(sc.coeffs.clone()), closed: true }
    }

    /// Realize as an arc-length curve. `n` applies to polylines and
    /// support functions; arc files keep their own node count.
    pub fn to_curve(&self, n: usize) -> Result<ArcCurve> {
        if !self.closed {
            bail!("open curves are not supported");
        }
        match self.kind {
            CurveKind::Arc | CurveKind::Polyline => {
                let Some(nodes) = &self.nodes else { bail!("{:?} curve needs \"nodes\"", self.kind) };
                let n = if self.kind == CurveKind::Arc { nodes.len() } else { n };
                Ok(resample_arclength(nodes, n)?)
            }
            CurveKind::Support => {
                let sc = self.support_curve()?;
                Ok(support_to_curve(&sc, n, 1e-3 * sc.a0)?)
            }
        }
    }

    pub fn support_curve(&self) -> Result<SupportCurve> {
        match (self.kind.clone(), self.a0) {
            (CurveKind::Support, Some(a0)) => Ok(SupportCurve { a0, coeffs: self.coeffs.clone().unwrap_or_default() }),
            (CurveKind::Support, None) => bail!("support curve needs \"a0\""),
            _ => bail!("not a support curve"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum DomainFile {
    Named(String),
    Interval { interval: [f64; 2] },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FunctionFile {
    pub domain: DomainFile,
    pub samples: Vec<f64>,
}

impl FunctionFile {
    pub fn to_grid(&self) -> Result<GridFunction> {
        let domain = match &self.domain {
            DomainFile::Named(name) if name == "circle" => Domain::Circle,
            DomainFile::Named(name) => bail!("unknown domain {name:?}; use \"circle\" or {{\"interval\": [a, b]}}"),
            DomainFile::Interval { interval: [a, b] } => Domain::Interval { a: *a, b: *b },
        };
        Ok(GridFunction::new(self.samples.clone(), domain)?)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn digest(path: &Path) -> Result<FileDigest> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let hash = Sha256::digest(&bytes);
    let sha256 = hash.iter().map(|b| format!("{b:02x}")).collect();
    Ok(FileDigest { path: path.to_path_buf(), sha256 })
}
