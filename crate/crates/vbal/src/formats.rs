//! On-disk formats: instance and body JSON, sample CSV.
//!
//! JSON floats go through serde_json's shortest round-trip printer and CSV
//! floats are written with 17 significant digits, so every file reads back
//! bit-for-bit.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vbal_core::{ConvexBody, Mat, VectorSystem};

use crate::CliError;

/// A vector system: `vectors[i]` is the column `v_i ∈ ℝ^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub m: usize,
    pub n: usize,
    pub vectors: Vec<Vec<f64>>,
    /// Certificate coefficients; all zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_bound: Option<f64>,
}

impl InstanceFile {
    pub fn from_system(sys: &VectorSystem) -> Self {
        let vectors = (0..sys.len()).map(|i| sys.vectors().column(i).iter().copied().collect()).collect();
        InstanceFile {
            m: sys.dim(),
            n: sys.len(),
            vectors,
            lambda: Some(sys.lambda().iter().copied().collect()),
            norm_bound: sys.norm_bound(),
        }
    }

    pub fn to_system(&self) -> Result<VectorSystem, CliError> {
        if self.vectors.len() != self.n {
            return Err(CliError::Format(format!(
                "instance declares n = {} but lists {} vectors",
                self.n,
                self.vectors.len()
            )));
        }
        if let Some(bad) = self.vectors.iter().position(|v| v.len() != self.m) {
            return Err(CliError::Format(format!("vector {bad} does not have m = {} entries", self.m)));
        }
        let lambda = match &self.lambda {
            Some(l) if l.len() != self.n => {
                return Err(CliError::Format(format!("lambda has {} entries, expected {}", l.len(), self.n)))
            }
            // Range checks (with a 1e-12 slack) happen in the core constructor.
            Some(l) => l.clone(),
            None => vec![0.0; self.n],
        };
        let sys = VectorSystem::from_columns(self.m, &self.vectors, lambda)?;
        match self.norm_bound {
            Some(b) => Ok(sys.with_norm_bound(b)?),
            None => Ok(sys),
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("instances serialize");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A body built from the composable primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodyFile {
    Whole {
        dim: usize,
    },
    /// `center + [−scale, scale]^dim`; `center` defaults to the origin.
    Cube {
        scale: f64,
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `⟨normal, x⟩ ≤ offset`.
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    Intersection {
        children: Vec<BodyFile>,
    },
    /// `K − shift` for the single child `K`.
    Shifted {
        shift: Vec<f64>,
        children: Vec<BodyFile>,
    },
    Scaled {
        factor: f64,
        children: Vec<BodyFile>,
    },
    Symmetrized {
        children: Vec<BodyFile>,
    },
}

fn only_child(children: &[BodyFile], kind: &str) -> Result<ConvexBody, CliError> {
    match children {
        [one] => one.to_body(),
        _ => Err(CliError::Format(format!("{kind} body needs exactly one child, got {}", children.len()))),
    }
}

impl BodyFile {
    pub fn to_body(&self) -> Result<ConvexBody, CliError> {
        Ok(match self {
            BodyFile::Whole { dim } => ConvexBody::whole(*dim),
            BodyFile::Cube { scale, dim, center } => match center {
                Some(c) if c.len() != *dim => {
                    return Err(CliError::Format(format!("cube center has {} entries, expected {dim}", c.len())))
                }
                Some(c) => ConvexBody::box_around(c.clone(), *scale)?,
                None => ConvexBody::cube(*dim, *scale)?,
            },
            BodyFile::Ball { center, radius } => ConvexBody::ball(center.clone(), *radius)?,
            BodyFile::Halfspace { normal, offset } => ConvexBody::halfspace(normal.clone(), *offset)?,
            BodyFile::Intersection { children } => {
                ConvexBody::intersection(children.iter().map(BodyFile::to_body).collect::<Result<_, _>>()?)?
            }
            BodyFile::Shifted { shift, children } => only_child(children, "shifted")?.shifted(shift.clone())?,
            BodyFile::Scaled { factor, children } => only_child(children, "scaled")?.scaled(*factor)?,
            BodyFile::Symmetrized { children } => {
                ConvexBody::Symmetrized(Arc::new(only_child(children, "symmetrized")?))
            }
        })
    }

    /// Inverse of [`BodyFile::to_body`]; slices and custom oracles have no file form.
    pub fn from_body(body: &ConvexBody) -> Result<Self, CliError> {
        let one = |b: &ConvexBody| Ok::<_, CliError>(vec![BodyFile::from_body(b)?]);
        Ok(match body {
            ConvexBody::Whole { dim } => BodyFile::Whole { dim: *dim },
            ConvexBody::Cube { scale, center } => BodyFile::Cube {
                scale: *scale,
                dim: center.len(),
                center: center.iter().any(|&c| c != 0.0).then(|| center.clone()),
            },
            ConvexBody::Ball { center, radius } => BodyFile::Ball { center: center.clone(), radius: *radius },
            ConvexBody::Halfspace { normal, offset } => {
                BodyFile::Halfspace { normal: normal.clone(), offset: *offset }
            }
            ConvexBody::Intersection(parts) => BodyFile::Intersection {
                children: parts.iter().map(BodyFile::from_body).collect::<Result<_, _>>()?,
            },
            ConvexBody::Shifted { body, shift } => BodyFile::Shifted { shift: shift.clone(), children: one(body)? },
            ConvexBody::Scaled { body, factor } => BodyFile::Scaled { factor: *factor, children: one(body)? },
            ConvexBody::Symmetrized(body) => BodyFile::Symmetrized { children: one(body)? },
            ConvexBody::Slice { .. } | ConvexBody::Oracle(_) => {
                return Err(CliError::Format("slices and custom oracles cannot be written to a file".into()))
            }
        })
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("values serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_instance(path: &Path) -> Result<(InstanceFile, VectorSystem), CliError> {
    let file: InstanceFile = read_json(path)?;
    let sys = file.to_system()?;
    Ok((file, sys))
}

pub fn read_body(path: &Path) -> Result<ConvexBody, CliError> {
    read_json::<BodyFile>(path)?.to_body()
}

/// One row per sample, 17 significant digits per entry, no header.
pub fn write_samples<W: Write>(out: W, rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in rows {
        w.write_record(row.iter().map(|x| format!("{x:.16e}")))
            .map_err(|e| CliError::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Format(e.to_string()))
}

pub fn read_samples<R: Read>(input: R) -> Result<Vec<Vec<f64>>, CliError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| CliError::Format(e.to_string()))?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CliError::Format(format!("sample row {}: {e}", line + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn matrix_rows(x: &Mat) -> Vec<Vec<f64>> {
    x.row_iter().map(|r| r.iter().copied().collect()).collect()
}
