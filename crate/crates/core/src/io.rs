//! DNT1 tensor files.
//!
//! Layout: a 16-byte header — magic "DNT1", u32 n, u32 L (little-endian),
//! u8 kind (0 = bits, 1 = f64), three zero pad bytes — followed by row-major
//! slice data (slice 0 first), little-endian for f64, one byte per entry for
//! bits. A JSON sidecar `<file>.json` records the kind and the pair-order
//! version tag so vectorized artifacts stay comparable.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::tensor::{AdjacencyTensor, ProbabilityTensor};

pub const MAGIC: &[u8; 4] = b"DNT1";
pub const PAIR_ORDER_TAG: &str = "upper-col-major-v1";

const KIND_BITS: u8 = 0;
const KIND_F64: u8 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub kind: String,
    pub n: usize,
    #[serde(rename = "L")]
    pub horizon: usize,
    pub pair_order: String,
}

impl Sidecar {
    fn new(kind: &str, n: usize, horizon: usize) -> Self {
        Self {
            format: "DNT1".into(),
            kind: kind.into(),
            n,
            horizon,
            pair_order: PAIR_ORDER_TAG.into(),
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}

fn write_header(w: &mut impl Write, n: usize, horizon: usize, kind: u8) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&(horizon as u32).to_le_bytes())?;
    w.write_all(&[kind, 0, 0, 0])?;
    Ok(())
}

fn read_header(r: &mut impl Read) -> Result<(usize, usize, u8)> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(Error::Format("bad magic (expected DNT1)".into()));
    }
    let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let horizon = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let kind = header[12];
    Ok((n, horizon, kind))
}

fn write_sidecar(path: &Path, sidecar: &Sidecar) -> Result<()> {
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(sidecar)?)?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let raw = std::fs::read_to_string(sidecar_path(path))?;
    Ok(serde_json::from_str(&raw)?)
}

pub fn write_adjacency(b: &AdjacencyTensor, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    write_header(&mut f, b.n(), b.horizon(), KIND_BITS)?;
    f.write_all(b.data())?;
    write_sidecar(path, &Sidecar::new("bits", b.n(), b.horizon()))
}

pub fn read_adjacency(path: &Path) -> Result<AdjacencyTensor> {
    let mut f = std::fs::File::open(path)?;
    let (n, horizon, kind) = read_header(&mut f)?;
    if kind != KIND_BITS {
        return Err(Error::Format(format!("expected bits tensor, kind byte is {kind}")));
    }
    let mut data = vec![0u8; n * n * horizon];
    f.read_exact(&mut data)?;
    AdjacencyTensor::new(n, horizon, data)
}

pub fn write_probability(lam: &ProbabilityTensor, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    write_header(&mut f, lam.n(), lam.horizon(), KIND_F64)?;
    for v in lam.data() {
        f.write_all(&v.to_le_bytes())?;
    }
    write_sidecar(path, &Sidecar::new("f64", lam.n(), lam.horizon()))
}

pub fn read_probability(path: &Path) -> Result<ProbabilityTensor> {
    let (n, horizon, data) = read_f64_payload(path)?;
    ProbabilityTensor::new(n, horizon, data)
}

fn read_f64_payload(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut f = std::fs::File::open(path)?;
    let (n, horizon, kind) = read_header(&mut f)?;
    if kind != KIND_F64 {
        return Err(Error::Format(format!("expected f64 tensor, kind byte is {kind}")));
    }
    let mut raw = Vec::new();
    f.read_to_end(&mut raw)?;
    if raw.len() != n * n * horizon * 8 {
        return Err(Error::Format(format!(
            "payload is {} bytes, expected {}",
            raw.len(),
            n * n * horizon * 8
        )));
    }
    let data = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((n, horizon, data))
}

/// A square matrix stored as a single f64 slice (n = rows, L = 1); used for
/// temporal basis files.
pub fn write_matrix(m: &Mat, path: &Path, kind: &str) -> Result<()> {
    if m.rows() != m.cols() {
        return Err(Error::Format("only square matrices are stored".into()));
    }
    let mut f = std::fs::File::create(path)?;
    write_header(&mut f, m.rows(), 1, KIND_F64)?;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            f.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    write_sidecar(path, &Sidecar::new(kind, m.rows(), 1))
}

pub fn read_matrix(path: &Path) -> Result<Mat> {
    let (n, horizon, data) = read_f64_payload(path)?;
    if horizon != 1 {
        return Err(Error::Format("matrix files carry a single slice".into()));
    }
    Ok(Mat::from_fn(n, n, |i, j| data[i * n + j]))
}
