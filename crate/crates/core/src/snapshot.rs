//! Bit-exact binary snapshots.
//!
//! Layout (little-endian): magic `QTRB`, version `u32 = 1`, dims `u32`, n `u32`,
//! L `f64`, t `f64`, seed `u64`, params length `u32` followed by UTF-8 JSON,
//! then `n^dims` interleaved `(re, im)` `f64` pairs, x fastest.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FieldMeta, GridSpec, WaveField};

pub const MAGIC: [u8; 4] = *b"QTRB";
pub const VERSION: u32 = 1;

pub fn encode(field: &WaveField) -> Vec<u8> {
    let g = field.grid;
    let params = field.meta.params.as_bytes();
    let mut out = Vec::with_capacity(40 + params.len() + 16 * field.values.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dims as u32).to_le_bytes());
    out.extend_from_slice(&(g.n as u32).to_le_bytes());
    out.extend_from_slice(&g.length.to_le_bytes());
    out.extend_from_slice(&field.time.to_le_bytes());
    out.extend_from_slice(&field.meta.seed.to_le_bytes());
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    out.extend_from_slice(params);
    for v in &field.values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn save_snapshot(field: &WaveField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(field);
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<WaveField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, context: &'static str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Truncated { path: self.path.to_path_buf(), context }),
        }
    }

    fn u32(&mut self, context: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, context)?.try_into().unwrap()))
    }

    fn u64(&mut self, context: &'static str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, context)?.try_into().unwrap()))
    }

    fn f64(&mut self, context: &'static str) -> Result<f64> {
        Ok(f64::from_bits(self.u64(context)?))
    }
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<WaveField> {
    let mut r = Reader { bytes, pos: 0, path };
    let magic: [u8; 4] = r.take(4, "magic")?.try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic { path: path.to_path_buf(), found: magic });
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::VersionMismatch { path: path.to_path_buf(), found: version, expected: VERSION });
    }
    let dims = r.u32("dims")? as usize;
    let n = r.u32("n")? as usize;
    let length = r.f64("box length")?;
    let time = r.f64("time")?;
    let seed = r.u64("seed")?;
    let grid = GridSpec::new(dims, n, length).map_err(|e| Error::DimensionMismatch { path: path.to_path_buf(), detail: e.to_string() })?;
    let plen = r.u32("params length")? as usize;
    let params = r.take(plen, "params")?;
    let params = String::from_utf8(params.to_vec())
        .map_err(|_| Error::DimensionMismatch { path: path.to_path_buf(), detail: "params block is not UTF-8".into() })?;
    let count = grid.len();
    let payload = bytes.len() - r.pos;
    if payload < count * 16 {
        return Err(Error::Truncated { path: path.to_path_buf(), context: "sample payload" });
    }
    if payload > count * 16 {
        return Err(Error::DimensionMismatch {
            path: path.to_path_buf(),
            detail: format!("{} payload bytes for {count} samples", payload),
        });
    }
    let values = r.bytes[r.pos..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap())))
        .collect();
    Ok(WaveField { grid, values, time, meta: FieldMeta { seed, params } })
}
