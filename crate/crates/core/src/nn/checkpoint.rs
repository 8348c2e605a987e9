//! Binary parameter checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes  "TSEGCKPT"
//! version  u32
//! n_meta   u32      then n_meta pairs of (string key, string value)
//! n_blocks u32      then per block: name, n_dims u32, dims u64 each,
//!                   then rows·cols·… f64 payload values
//! ```
//!
//! Strings are a u32 byte length followed by UTF-8 bytes. Meta pairs carry
//! model-level configuration (dims, seed, label-index convention); loading
//! into a parameter container rejects any missing, extra, or reshaped block.

use super::params::ParamSet;
use std::collections::HashMap;
use std::io::{self, Read, Write};
use thiserror::Error;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"TSEGCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {found} (supported: {CHECKPOINT_VERSION})")]
    BadVersion { found: u32 },
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error("checkpoint is missing parameter block {name}")]
    MissingBlock { name: String },
    #[error("checkpoint has unexpected parameter block {name}")]
    UnexpectedBlock { name: String },
    #[error("block {name}: checkpoint shape {found:?} does not match expected {expected:?}")]
    BlockShapeMismatch {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("checkpoint is missing metadata key {key}")]
    MissingMeta { key: String },
    #[error("metadata key {key} has unusable value {value:?}")]
    BadMeta { key: String, value: String },
}

/// A checkpoint as read from disk, before binding to a parameter container.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCheckpoint {
    pub meta: Vec<(String, String)>,
    pub blocks: Vec<RawBlock>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawBlock {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl RawCheckpoint {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Fetches and parses a metadata value.
    pub fn meta_parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, CheckpointError> {
        let value = self.meta_value(key).ok_or_else(|| CheckpointError::MissingMeta {
            key: key.to_string(),
        })?;
        value.parse().map_err(|_| CheckpointError::BadMeta {
            key: key.to_string(),
            value: value.to_string(),
        })
    }
}

/// Writes `params` with the given metadata pairs.
pub fn write_checkpoint<W: Write, P: ParamSet + ?Sized>(
    mut w: W,
    meta: &[(String, String)],
    params: &P,
) -> io::Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(meta.len() as u32).to_le_bytes())?;
    for (k, v) in meta {
        write_string(&mut w, k)?;
        write_string(&mut w, v)?;
    }
    let mut blocks: Vec<(String, Vec<usize>, Vec<f64>)> = Vec::new();
    params.visit(&mut |name, shape, data| {
        blocks.push((name.to_string(), shape.to_vec(), data.to_vec()));
    });
    w.write_all(&(blocks.len() as u32).to_le_bytes())?;
    for (name, shape, data) in &blocks {
        write_string(&mut w, name)?;
        w.write_all(&(shape.len() as u32).to_le_bytes())?;
        for &dim in shape {
            w.write_all(&(dim as u64).to_le_bytes())?;
        }
        for v in data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a checkpoint without binding it to any container.
pub fn read_checkpoint<R: Read>(mut r: R) -> Result<RawCheckpoint, CheckpointError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::BadVersion { found: version });
    }
    let n_meta = read_u32(&mut r)? as usize;
    let mut meta = Vec::with_capacity(n_meta);
    for _ in 0..n_meta {
        let k = read_string(&mut r)?;
        let v = read_string(&mut r)?;
        meta.push((k, v));
    }
    let n_blocks = read_u32(&mut r)? as usize;
    let mut blocks = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        let name = read_string(&mut r)?;
        let n_dims = read_u32(&mut r)? as usize;
        let mut shape = Vec::with_capacity(n_dims);
        for _ in 0..n_dims {
            shape.push(read_u64(&mut r)? as usize);
        }
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut buf = [0u8; 8];
        for _ in 0..len {
            r.read_exact(&mut buf)?;
            data.push(f64::from_le_bytes(buf));
        }
        blocks.push(RawBlock { name, shape, data });
    }
    Ok(RawCheckpoint { meta, blocks })
}

/// Copies checkpoint blocks into `params`. Every block must match an
/// existing parameter by name and shape; extra or missing blocks fail.
pub fn load_into<P: ParamSet>(raw: &RawCheckpoint, params: &mut P) -> Result<(), CheckpointError> {
    let mut by_name: HashMap<&str, &RawBlock> = HashMap::new();
    for block in &raw.blocks {
        by_name.insert(block.name.as_str(), block);
    }
    let mut used = 0usize;
    let mut failure: Option<CheckpointError> = None;
    params.visit_mut(&mut |name, shape, data| {
        if failure.is_some() {
            return;
        }
        match by_name.get(name) {
            None => {
                failure = Some(CheckpointError::MissingBlock {
                    name: name.to_string(),
                });
            }
            Some(block) => {
                if block.shape != shape {
                    failure = Some(CheckpointError::BlockShapeMismatch {
                        name: name.to_string(),
                        expected: shape.to_vec(),
                        found: block.shape.clone(),
                    });
                } else {
                    data.copy_from_slice(&block.data);
                    used += 1;
                }
            }
        }
    });
    if let Some(err) = failure {
        return Err(err);
    }
    if used != raw.blocks.len() {
        // Some block in the file matched no parameter.
        let mut names: Vec<&str> = Vec::new();
        let mut p_names: Vec<String> = Vec::new();
        params.visit(&mut |name, _, _| p_names.push(name.to_string()));
        for block in &raw.blocks {
            if !p_names.iter().any(|n| n == &block.name) {
                names.push(&block.name);
            }
        }
        return Err(CheckpointError::UnexpectedBlock {
            name: names.first().unwrap_or(&"<duplicate>").to_string(),
        });
    }
    Ok(())
}

fn write_string<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, CheckpointError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, CheckpointError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_string<R: Read>(r: &mut R) -> Result<String, CheckpointError> {
    let len = read_u32(r)? as usize;
    if len > 1 << 20 {
        return Err(CheckpointError::Malformed(format!(
            "string length {len} is implausible"
        )));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| CheckpointError::Malformed("non-UTF-8 string".into()))
}
