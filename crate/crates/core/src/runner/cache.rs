//! On-disk cache of solver outputs, keyed by the run description and the
//! crate version.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::solver::{GradOrField, GridSpec, Snapshot, StepStats};

const MAGIC: &[u8; 8] = b"PHIFLD01";

#[derive(Serialize, Deserialize)]
struct Header {
    key: String,
    grid: GridSpec,
    times: Vec<f64>,
    values_per_snapshot: usize,
    stats: Vec<StepStats>,
}

/// Key of a run description: SHA-256 over its canonical JSON and the crate version.
pub fn cache_key(description: &impl Serialize) -> String {
    let text = serde_json::to_string(description).expect("run description serialises");
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    h.update(b"\0");
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    hex::encode(h.finalize())
}

pub struct FieldCache {
    dir: PathBuf,
}

impl FieldCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.field"))
    }

    pub fn load(&self, key: &str) -> Result<Option<GradOrField>> {
        let path = self.path(key);
        if !path.exists() {
            return Ok(None);
        }
        read_field(&path).map(Some)
    }

    /// Writes through a temporary file so concurrent readers never see a
    /// partial entry. Returns `false` without writing when the header would
    /// not read back exactly (non-finite statistics).
    pub fn store(&self, key: &str, field: &GradOrField) -> Result<bool> {
        let header = Header {
            key: key.to_string(),
            grid: field.grid.clone(),
            times: field.times(),
            values_per_snapshot: field.snapshots.first().map_or(0, |s| s.u.len()),
            stats: field.stats.clone(),
        };
        let json = serde_json::to_vec(&header)?;
        let exact = serde_json::from_slice::<Header>(&json).is_ok_and(|back| {
            back.stats == header.stats && back.times.iter().zip(&header.times).all(|(a, b)| a.to_bits() == b.to_bits())
        });
        if !exact {
            return Ok(false);
        }
        let tmp = self.dir.join(format!("{key}.tmp{}", std::process::id()));
        write_field(&tmp, &json, field)?;
        fs::rename(tmp, self.path(key))?;
        Ok(true)
    }
}

fn write_field(path: &Path, json: &[u8], field: &GradOrField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(json)?;
    for s in &field.snapshots {
        for v in &s.u {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_field(path: &Path) -> Result<GradOrField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidParameter(format!("{} is not a field cache entry", path.display())));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
    r.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json)?;
    let geo = header.grid.geometry()?;
    let mut field = GradOrField::new(header.grid, geo);
    let mut buf = [0u8; 8];
    for t in header.times {
        let mut u = Vec::with_capacity(header.values_per_snapshot);
        for _ in 0..header.values_per_snapshot {
            r.read_exact(&mut buf)?;
            u.push(f64::from_le_bytes(buf));
        }
        field.push(Snapshot { t, u });
    }
    field.stats = header.stats;
    Ok(field)
}
