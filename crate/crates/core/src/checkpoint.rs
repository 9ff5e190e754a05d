//! Binary checkpoint format.
//!
//! ```text
//! "SRN1"                      4 bytes
//! version                     u32 LE
//! sizes X Y Z A B C H         7 × u32 LE
//! edges XA YB ZC AH BH CH     row-major f64 LE, shape (post, pre)
//! config length               u32 LE
//! config                      UTF-8 key=value lines
//! ```

use std::fs;
use std::path::Path;

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::relnet::{Edge, RelationalTopology};

pub const MAGIC: &[u8; 4] = b"SRN1";
pub const VERSION: u32 = 1;

pub fn encode_checkpoint(topo: &RelationalTopology, config: &SimulationConfig) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for n in topo.sizes() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for e in Edge::ALL {
        for w in topo.weights(e).as_slice() {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    let mut cfg = config.clone();
    cfg.set_sizes(topo.sizes());
    let text = cfg.to_text();
    out.extend_from_slice(&(text.len() as u32).to_le_bytes());
    out.extend_from_slice(text.as_bytes());
    out
}

pub fn save_checkpoint(topo: &RelationalTopology, config: &SimulationConfig, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_checkpoint(topo, config))?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Truncated(format!("checkpoint {what} at byte {}", self.pos))),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(RelationalTopology, SimulationConfig)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic").map_err(|_| Error::CorruptHeader)? != MAGIC {
        return Err(Error::CorruptHeader);
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::VersionMismatch { found: version, expected: VERSION });
    }
    let mut sizes = [0usize; 7];
    for s in &mut sizes {
        *s = r.u32("population sizes")? as usize;
    }
    if sizes.contains(&0) {
        return Err(Error::CorruptHeader);
    }
    let mut weights = Vec::with_capacity(6);
    for e in Edge::ALL {
        let (pre, post) = e.endpoints();
        let (rows, cols) = (sizes[post.index()], sizes[pre.index()]);
        let len = rows.checked_mul(cols).and_then(|n| n.checked_mul(8)).ok_or(Error::CorruptHeader)?;
        let raw = r.take(len, "weights")?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunks of 8")))
            .collect();
        weights.push(Matrix::from_vec(rows, cols, data)?);
    }
    let text_len = r.u32("config length")? as usize;
    let text = r.take(text_len, "config")?;
    if r.pos != bytes.len() {
        return Err(Error::Config(format!("{} trailing bytes after config", bytes.len() - r.pos)));
    }
    let text = std::str::from_utf8(text).map_err(|e| Error::Config(e.to_string()))?;
    let config = SimulationConfig::from_text(text)?;
    if config.sizes() != sizes {
        return Err(Error::SizeMismatch { expected: sizes, found: config.sizes() });
    }
    let topo = RelationalTopology::with_weights(sizes, config.hyper_params()?, config.update_mode, weights)?;
    Ok((topo, config))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(RelationalTopology, SimulationConfig)> {
    decode_checkpoint(&fs::read(path)?)
}

/// Loads a checkpoint and requires its population sizes to equal `expected`.
pub fn load_checkpoint_for(
    path: impl AsRef<Path>,
    expected: [usize; 7],
) -> Result<(RelationalTopology, SimulationConfig)> {
    let (topo, config) = load_checkpoint(path)?;
    if topo.sizes() != expected {
        return Err(Error::SizeMismatch { expected, found: topo.sizes() });
    }
    Ok((topo, config))
}
