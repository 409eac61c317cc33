//! On-disk JSON cache of computed spectra.
//!
//! Entries are keyed by a SHA-256 digest of the geometry and spectrum
//! configuration, and written atomically (temporary file, then rename).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::geometry::{BarrierGeometry, SpectrumConfig};
use crate::spectrum::{find_levels, EnergySpectrum};

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct KeyFields<'a> {
    version: u32,
    geometry: &'a BarrierGeometry,
    config: &'a SpectrumConfig,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    version: u32,
    key: String,
    spectrum: EnergySpectrum,
}

/// Hex digest identifying `(geometry, config)`.
pub fn cache_key(geometry: &BarrierGeometry, config: &SpectrumConfig) -> String {
    let fields = KeyFields {
        version: FORMAT_VERSION,
        geometry,
        config,
    };
    let bytes = serde_json::to_vec(&fields).expect("key fields serialize");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Clone, Debug)]
pub struct SpectrumCache {
    dir: PathBuf,
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SpectrumCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("spectrum-{key}.json"))
    }

    /// Cached spectrum, or `None` when missing or unreadable.
    pub fn load(&self, geometry: &BarrierGeometry, config: &SpectrumConfig) -> Option<EnergySpectrum> {
        let key = cache_key(geometry, config);
        let path = self.path_for(&key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                log::warn!("cannot read cache entry {}: {e}", path.display());
                return None;
            }
        };
        match serde_json::from_str::<Entry>(&text) {
            Ok(entry) if entry.version == FORMAT_VERSION && entry.key == key => Some(entry.spectrum),
            Ok(_) => {
                log::warn!("stale cache entry {}, recomputing", path.display());
                None
            }
            Err(e) => {
                log::warn!("corrupted cache entry {}: {e}; recomputing", path.display());
                None
            }
        }
    }

    pub fn store(&self, geometry: &BarrierGeometry, config: &SpectrumConfig, spectrum: &EnergySpectrum) -> Result<PathBuf> {
        let key = cache_key(geometry, config);
        let path = self.path_for(&key);
        let entry = Entry {
            version: FORMAT_VERSION,
            key,
            spectrum: spectrum.clone(),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, &entry)?;
        tmp.flush()?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(path)
    }

    /// Loads the spectrum, computing and storing it on a miss.
    pub fn get_or_compute(&self, geometry: &BarrierGeometry, config: &SpectrumConfig) -> Result<EnergySpectrum> {
        if let Some(s) = self.load(geometry, config) {
            log::debug!("cache hit for {}", cache_key(geometry, config));
            return Ok(s);
        }
        let spectrum = find_levels(geometry, config)?;
        self.store(geometry, config, &spectrum)?;
        Ok(spectrum)
    }
}
