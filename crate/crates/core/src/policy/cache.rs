use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_TTL: Duration = Duration::from_secs(24 * 60 * 60);
pub const CACHE_DIR_ENV: &str = "PRIVSCAN_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = "./.privscan-cache";

#[derive(Debug, Error)]
#[error("policy cache i/o error at {path}: {source}")]
pub struct CacheIoError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CacheIoError + '_ {
    move |source| CacheIoError { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CacheMeta {
    url: String,
    stored_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub key: String,
    pub html_path: PathBuf,
    pub stored_at: SystemTime,
}

/// Disk store of fetched policy pages: `<sha256(url)>.html` plus a `.meta` JSON file.
#[derive(Debug)]
pub struct CacheStore {
    dir: PathBuf,
    ttl: Duration,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

pub fn cache_key(normalized_url: &str) -> String {
    hex::encode(Sha256::digest(normalized_url.as_bytes()))
}

impl CacheStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, CacheIoError> {
        Self::with_ttl(dir, DEFAULT_TTL)
    }

    pub fn with_ttl(dir: impl Into<PathBuf>, ttl: Duration) -> Result<Self, CacheIoError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Self { dir, ttl, locks: Mutex::new(HashMap::new()) })
    }

    /// Opens the directory named by `PRIVSCAN_CACHE_DIR`, or the default.
    pub fn from_env() -> Result<Self, CacheIoError> {
        let dir = std::env::var_os(CACHE_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR), PathBuf::from);
        Self::open(dir)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    /// Lock serializing writers (and the miss path) for one key.
    pub(crate) fn key_lock(&self, key: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(key.to_string()).or_default().clone()
    }

    fn html_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.html"))
    }

    fn meta_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.meta"))
    }

    /// Live entry for `normalized_url` and its bytes, if stored within the TTL.
    pub fn lookup(&self, normalized_url: &str, now: SystemTime) -> Result<Option<(CacheEntry, Vec<u8>)>, CacheIoError> {
        let key = cache_key(normalized_url);
        let meta_path = self.meta_path(&key);
        let meta_bytes = match fs::read(&meta_path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(io_err(&meta_path)(e)),
        };
        // a torn or foreign meta file is treated as a miss and rewritten
        let Ok(meta) = serde_json::from_slice::<CacheMeta>(&meta_bytes) else {
            return Ok(None);
        };
        if meta.url != normalized_url {
            return Ok(None);
        }
        let stored_at = UNIX_EPOCH + Duration::from_secs(meta.stored_at);
        let age = now.duration_since(stored_at).unwrap_or_default();
        if age > self.ttl {
            return Ok(None);
        }
        let html_path = self.html_path(&key);
        let html = match fs::read(&html_path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(io_err(&html_path)(e)),
        };
        Ok(Some((CacheEntry { key, html_path, stored_at }, html)))
    }

    /// Writes the page then its meta file, each through a temp file and an atomic rename.
    pub fn store(&self, normalized_url: &str, html: &[u8], now: SystemTime) -> Result<CacheEntry, CacheIoError> {
        let key = cache_key(normalized_url);
        let stored_secs = now.duration_since(UNIX_EPOCH).unwrap_or_default().as_secs();
        let html_path = self.html_path(&key);
        self.write_atomic(&html_path, html)?;
        let meta = CacheMeta { url: normalized_url.to_string(), stored_at: stored_secs };
        let meta_bytes = serde_json::to_vec_pretty(&meta).expect("meta serializes");
        self.write_atomic(&self.meta_path(&key), &meta_bytes)?;
        Ok(CacheEntry { key, html_path, stored_at: UNIX_EPOCH + Duration::from_secs(stored_secs) })
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> Result<(), CacheIoError> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io_err(&self.dir))?;
        tmp.write_all(bytes).map_err(io_err(path))?;
        tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
        Ok(())
    }
}
