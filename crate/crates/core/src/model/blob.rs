//! Binary and text encodings of [`ModelParams`].
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! b"FFMP" | version: u8 = 1 | kind: u8 (0 linear, 1 mlp)
//! input_dim: u32 | hidden_dim: u32 (0 for linear) | count: u64 | count × f64
//! ```

use super::{Architecture, ModelParams};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"FFMP";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 1 + 4 + 4 + 8;

impl ModelParams {
    pub fn to_bytes(&self) -> Vec<u8> {
        let (kind, d, h) = match self.arch {
            Architecture::Linear { input_dim } => (0u8, input_dim, 0),
            Architecture::Mlp {
                input_dim,
                hidden_dim,
            } => (1u8, input_dim, hidden_dim),
        };
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(kind);
        out.extend_from_slice(&(d as u32).to_le_bytes());
        out.extend_from_slice(&(h as u32).to_le_bytes());
        out.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Blob(format!(
                "{} bytes is shorter than the header",
                bytes.len()
            )));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Blob("bad magic".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::Blob(format!("unsupported version {}", bytes[4])));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
        let d = u32_at(6);
        let h = u32_at(10);
        let arch = match bytes[5] {
            0 => Architecture::Linear { input_dim: d },
            1 => Architecture::Mlp {
                input_dim: d,
                hidden_dim: h,
            },
            k => return Err(Error::Blob(format!("unknown architecture kind {k}"))),
        };
        let count = u64::from_le_bytes(bytes[14..22].try_into().unwrap()) as usize;
        let body = &bytes[HEADER_LEN..];
        if body.len() != count.saturating_mul(8) {
            return Err(Error::Blob(format!(
                "expected {count} values, found {} bytes",
                body.len()
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        ModelParams::new(arch, values).map_err(|e| Error::Blob(e.to_string()))
    }

    /// One value per line, shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        self.values.iter().map(|v| format!("{v:?}\n")).collect()
    }

    pub fn from_text(arch: Architecture, text: &str) -> Result<Self> {
        let values = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Blob(format!("`{l}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        ModelParams::new(arch, values)
    }
}
