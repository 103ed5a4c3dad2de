//! Binary checkpoints: the 8-byte magic `WSCK0001`, a little-endian `u64`
//! header length, a JSON header, a little-endian `u64` parameter count and the
//! parameters as little-endian `f64`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::ParamVector;

use super::model::MlpSpec;

pub const MAGIC: &[u8; 8] = b"WSCK0001";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub spec: MlpSpec,
    pub seed: u64,
}

pub fn write_checkpoint<W: Write>(mut out: W, header: &CheckpointHeader, params: &[f64]) -> Result<()> {
    if params.len() != header.spec.param_count() {
        return Err(Error::DimensionMismatch { expected: header.spec.param_count(), got: params.len() });
    }
    let json = serde_json::to_vec(header)?;
    out.write_all(MAGIC)?;
    out.write_all(&(json.len() as u64).to_le_bytes())?;
    out.write_all(&json)?;
    out.write_all(&(params.len() as u64).to_le_bytes())?;
    for p in params {
        out.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<(CheckpointHeader, ParamVector)> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let header_len = read_u64(&mut input)?;
    let mut json = vec![0u8; usize::try_from(header_len).map_err(|_| Error::Checkpoint("header too large".into()))?];
    input.read_exact(&mut json)?;
    let header: CheckpointHeader = serde_json::from_slice(&json)?;
    header.spec.validate()?;
    let count = read_u64(&mut input)? as usize;
    if count != header.spec.param_count() {
        return Err(Error::Checkpoint(format!(
            "{count} parameters stored, spec needs {}",
            header.spec.param_count()
        )));
    }
    let mut params = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        input.read_exact(&mut buf)?;
        params.push(f64::from_le_bytes(buf));
    }
    Ok((header, ParamVector::new(params)?))
}

pub fn save(path: &Path, header: &CheckpointHeader, params: &[f64]) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint(file, header, params)
}

pub fn load(path: &Path) -> Result<(CheckpointHeader, ParamVector)> {
    read_checkpoint(std::io::BufReader::new(std::fs::File::open(path)?))
}
