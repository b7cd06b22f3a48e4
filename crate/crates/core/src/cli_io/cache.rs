//! Content-addressed store for the expensive stages.

use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use rug::{Complex, Float};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Hex SHA-256 of the concatenated parts, each prefixed by its length.
pub fn content_hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: Option<&Path>) -> Self {
        Cache { dir: dir.map(Path::to_path_buf) }
    }

    fn path(&self, kind: &str, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{kind}-{key}.json")))
    }

    /// A missing or unreadable entry is a miss.
    pub fn get<T: DeserializeOwned>(&self, kind: &str, key: &str) -> Option<T> {
        let p = self.path(kind, key)?;
        let text = fs::read_to_string(&p).ok()?;
        match serde_json::from_str(&text) {
            Ok(v) => {
                debug!("cache hit {}", p.display());
                Some(v)
            }
            Err(e) => {
                warn!("ignoring corrupt cache entry {}: {e}", p.display());
                None
            }
        }
    }

    pub fn put<T: Serialize>(&self, kind: &str, key: &str, value: &T) -> std::io::Result<()> {
        let Some(p) = self.path(kind, key) else { return Ok(()) };
        fs::create_dir_all(p.parent().expect("cache file has a parent"))?;
        let tmp = p.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec(value).map_err(std::io::Error::other)?)?;
        fs::rename(tmp, p)
    }
}

/// A complex number as two decimal strings that read back to the same bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexText(pub String, pub String);

impl ComplexText {
    pub fn new(z: &Complex) -> Self {
        ComplexText(z.real().to_string_radix(10, None), z.imag().to_string_radix(10, None))
    }

    pub fn to_complex(&self, prec: u32) -> Option<Complex> {
        let re = Float::parse(&self.0).ok()?;
        let im = Float::parse(&self.1).ok()?;
        Some(Complex::with_val(prec, (re, im)))
    }
}
