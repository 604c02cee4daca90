//! Where master indexes and payload bytes come from.

use std::path::PathBuf;
use std::{fs, io};

use super::index::PayloadRef;

pub const MASTER_INDEX_FILE: &str = "masterfilelist.txt";

#[derive(Debug, thiserror::Error)]
pub enum SourceError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("fetching {url}: {reason}")]
    Http { url: String, reason: String },
}

/// A byte-stream provider for the importer. Implementations must be shareable
/// across the parallel decode workers.
pub trait PayloadSource: Sync {
    fn master_index(&self) -> Result<String, SourceError>;
    fn fetch(&self, payload: &PayloadRef) -> Result<Vec<u8>, SourceError>;
    fn describe(&self) -> String;
}

/// A mirror directory holding `masterfilelist.txt` and the payload zips by file name.
#[derive(Debug, Clone)]
pub struct LocalDirSource {
    dir: PathBuf,
}

impl LocalDirSource {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        LocalDirSource { dir: dir.into() }
    }
}

impl PayloadSource for LocalDirSource {
    fn master_index(&self) -> Result<String, SourceError> {
        let path = self.dir.join(MASTER_INDEX_FILE);
        fs::read_to_string(&path).map_err(|source| SourceError::Io { path, source })
    }

    fn fetch(&self, payload: &PayloadRef) -> Result<Vec<u8>, SourceError> {
        let path = self.dir.join(payload.file_name());
        fs::read(&path).map_err(|source| SourceError::Io { path, source })
    }

    fn describe(&self) -> String {
        self.dir.display().to_string()
    }
}

/// Fetches the master index from `<base>/masterfilelist.txt` and payloads from their own urls.
#[cfg(feature = "http")]
#[derive(Debug, Clone)]
pub struct HttpSource {
    base_url: String,
}

#[cfg(feature = "http")]
impl HttpSource {
    pub fn new(base_url: impl Into<String>) -> Self {
        HttpSource { base_url: base_url.into().trim_end_matches('/').to_string() }
    }

    fn get(&self, url: &str) -> Result<Vec<u8>, SourceError> {
        let err = |reason: String| SourceError::Http { url: url.to_string(), reason };
        let mut response = ureq::get(url).call().map_err(|e| err(e.to_string()))?;
        response
            .body_mut()
            .with_config()
            .limit(1 << 30)
            .read_to_vec()
            .map_err(|e| err(e.to_string()))
    }
}

#[cfg(feature = "http")]
impl PayloadSource for HttpSource {
    fn master_index(&self) -> Result<String, SourceError> {
        let bytes = self.get(&format!("{}/{MASTER_INDEX_FILE}", self.base_url))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    fn fetch(&self, payload: &PayloadRef) -> Result<Vec<u8>, SourceError> {
        self.get(&payload.url)
    }

    fn describe(&self) -> String {
        self.base_url.clone()
    }
}
