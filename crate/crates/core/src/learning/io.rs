//! Binary model file.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "HDWM" | u16 version | u32 D | u32 K | u32 Q | u32 n | f64 eta
//! u64 item_seed | u64 level_seed | u64 sensor_seed | u64 tie_seed
//! u32 m | m x (f64 v_min, f64 v_max)
//! K x (u32 len, len bytes UTF-8 label)
//! u32 trained_epochs
//! K x D f32 class components
//! u32 CRC32 of every preceding byte
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use super::Model;
use crate::encoding::{EncoderConfig, Seeds};
use crate::hv::AccumHv;

pub const MAGIC: &[u8; 4] = b"HDWM";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model format version {0} (this build reads version {FORMAT_VERSION})")]
    UnsupportedVersion(u16),
    #[error("model file is truncated")]
    Truncated,
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("malformed model file: {0}")]
    Malformed(String),
}

fn to_u32(v: usize, what: &str) -> Result<u32, ModelFileError> {
    u32::try_from(v).map_err(|_| ModelFileError::Malformed(format!("{what} {v} exceeds u32")))
}

impl Model {
    pub fn to_bytes(&self) -> Result<Vec<u8>, ModelFileError> {
        let enc = self.encoder();
        let mut out = Vec::with_capacity(96 + self.num_classes() * self.dim() * 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        for (v, what) in [
            (self.dim(), "dimension"),
            (self.num_classes(), "class count"),
            (enc.q_levels, "level count"),
            (enc.n, "n-gram length"),
        ] {
            out.extend_from_slice(&to_u32(v, what)?.to_le_bytes());
        }
        out.extend_from_slice(&self.eta().to_le_bytes());
        for s in [enc.seeds.item, enc.seeds.level, enc.seeds.sensor, enc.seeds.tie] {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out.extend_from_slice(&to_u32(enc.arity(), "feature count")?.to_le_bytes());
        for &(lo, hi) in &enc.feature_bounds {
            out.extend_from_slice(&lo.to_le_bytes());
            out.extend_from_slice(&hi.to_le_bytes());
        }
        for label in self.classes() {
            out.extend_from_slice(&to_u32(label.len(), "label length")?.to_le_bytes());
            out.extend_from_slice(label.as_bytes());
        }
        out.extend_from_slice(&self.trained_epochs().to_le_bytes());
        for hv in self.class_hvs() {
            for c in hv.as_slice() {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelFileError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(if MAGIC.starts_with(bytes) {
                ModelFileError::Truncated
            } else {
                ModelFileError::BadMagic
            });
        }
        if bytes.len() < 6 {
            return Err(ModelFileError::Truncated);
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(ModelFileError::UnsupportedVersion(version));
        }
        let layout = expected_length(bytes);
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(match layout {
                Err(ModelFileError::Truncated) => ModelFileError::Truncated,
                Ok(total) if bytes.len() < total => ModelFileError::Truncated,
                _ => ModelFileError::ChecksumMismatch { stored, computed },
            });
        }
        let total = layout?;
        if total != bytes.len() {
            return Err(ModelFileError::Malformed(format!(
                "expected {total} bytes, found {}",
                bytes.len()
            )));
        }
        decode(body)
    }

    /// CRC32 of the serialized model.
    pub fn checksum(&self) -> Result<u32, ModelFileError> {
        Ok(crc32fast::hash(&self.to_bytes()?))
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelFileError> {
        let end = self.pos.checked_add(n).ok_or(ModelFileError::Truncated)?;
        let s = self.buf.get(self.pos..end).ok_or(ModelFileError::Truncated)?;
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32, ModelFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, ModelFileError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64, ModelFileError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Total file length implied by the header and label table.
fn expected_length(bytes: &[u8]) -> Result<usize, ModelFileError> {
    let mut r = Reader { buf: bytes, pos: 6 };
    let dim = r.u32()? as usize;
    let k = r.u32()? as usize;
    r.take(4 + 4 + 8 + 32)?;
    let m = r.u32()? as usize;
    r.take(m.checked_mul(16).ok_or(ModelFileError::Truncated)?)?;
    for _ in 0..k {
        let len = r.u32()? as usize;
        r.take(len)?;
    }
    r.take(4)?;
    let payload = k
        .checked_mul(dim)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| ModelFileError::Malformed("class payload overflows".into()))?;
    Ok(r.pos + payload + 4)
}

fn decode(body: &[u8]) -> Result<Model, ModelFileError> {
    let mut r = Reader { buf: body, pos: 6 };
    let dim = r.u32()? as usize;
    let k = r.u32()? as usize;
    let q_levels = r.u32()? as usize;
    let n = r.u32()? as usize;
    let eta = r.f64()?;
    let seeds = Seeds {
        item: r.u64()?,
        level: r.u64()?,
        sensor: r.u64()?,
        tie: r.u64()?,
    };
    let m = r.u32()? as usize;
    let mut feature_bounds = Vec::with_capacity(m);
    for _ in 0..m {
        feature_bounds.push((r.f64()?, r.f64()?));
    }
    let mut classes = Vec::with_capacity(k);
    for _ in 0..k {
        let len = r.u32()? as usize;
        let label = std::str::from_utf8(r.take(len)?)
            .map_err(|e| ModelFileError::Malformed(format!("class label is not UTF-8: {e}")))?;
        classes.push(label.to_string());
    }
    let trained_epochs = r.u32()?;
    let mut class_hvs = Vec::with_capacity(k);
    for _ in 0..k {
        let comps = r
            .take(dim * 4)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        class_hvs.push(AccumHv::from_vec(comps).map_err(|e| ModelFileError::Malformed(e.to_string()))?);
    }
    let encoder = EncoderConfig {
        dim,
        q_levels,
        n,
        seeds,
        feature_bounds,
    };
    Model::from_parts(classes, class_hvs, eta, encoder, trained_epochs)
        .map_err(|e| ModelFileError::Malformed(e.to_string()))
}

/// Writes the model atomically: a temporary file in the target directory is
/// renamed over `path` only after a complete write.
pub fn save_model(model: &Model, path: &Path) -> Result<(), ModelFileError> {
    let bytes = model.to_bytes()?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| ModelFileError::Io(e.error))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Model, ModelFileError> {
    Model::from_bytes(&fs::read(path)?)
}
