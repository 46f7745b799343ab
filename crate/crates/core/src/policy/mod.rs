//! Privacy policy ingestion: fetch by URL through a disk cache, strip the HTML and
//! split the text into sentences.

mod cache;
mod html;
mod sentences;
mod url;

use std::time::{Duration, SystemTime};

use thiserror::Error;

pub use self::url::{normalize_url, InvalidUrlError};
pub use cache::{cache_key, CacheEntry, CacheIoError, CacheStore, CACHE_DIR_ENV, DEFAULT_CACHE_DIR, DEFAULT_TTL};
pub use html::html_to_text;
pub use sentences::{split_sentences, Sentence};

/// Extracted text is capped at this many bytes.
pub const MAX_TEXT_BYTES: usize = 2 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

/// The one network capability policy ingestion needs: a GET returning status and body.
pub trait HttpGet: Send + Sync {
    fn get(&self, url: &str) -> Result<HttpResponse, String>;
}

/// Blocking GET over `ureq`.
#[derive(Debug, Clone)]
pub struct UreqGet {
    agent: ureq::Agent,
}

impl UreqGet {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .user_agent("privscan/0.1")
            .build();
        Self { agent: config.into() }
    }
}

impl Default for UreqGet {
    fn default() -> Self {
        Self::new(Duration::from_secs(20))
    }
}

impl HttpGet for UreqGet {
    fn get(&self, url: &str) -> Result<HttpResponse, String> {
        let mut resp = self.agent.get(url).call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().with_config().limit(32 * 1024 * 1024).read_to_vec().map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error(transparent)]
    InvalidUrl(#[from] InvalidUrlError),
    #[error("policy fetch failed: {0}")]
    Transport(String),
    #[error("policy server answered {status}")]
    Status { status: u16 },
    #[error(transparent)]
    Cache(#[from] CacheIoError),
}

impl FetchError {
    /// Upstream HTTP status, when the failure came from one.
    pub fn upstream_status(&self) -> Option<u16> {
        match self {
            Self::Status { status } => Some(*status),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyDocument {
    pub source_url: String,
    pub html: Vec<u8>,
    pub text: String,
    pub sentences: Vec<Sentence>,
    pub fetched_at: SystemTime,
    pub from_cache: bool,
    /// Set when the text exceeded [`MAX_TEXT_BYTES`] and was cut at a sentence end.
    pub truncated: bool,
}

impl PolicyDocument {
    pub fn from_html(source_url: String, html: Vec<u8>, fetched_at: SystemTime, from_cache: bool) -> Self {
        let (text, sentences, truncated) = extract(&html, MAX_TEXT_BYTES);
        Self { source_url, html, text, sentences, fetched_at, from_cache, truncated }
    }
}

fn extract(html: &[u8], limit: usize) -> (String, Vec<Sentence>, bool) {
    let mut text = html_to_text(html);
    if text.len() <= limit {
        let sentences = split_sentences(&text);
        return (text, sentences, false);
    }
    let mut sentences = split_sentences(&text);
    sentences.retain(|s| s.end() <= limit);
    let cut = sentences.last().map_or(0, Sentence::end);
    text.truncate(cut);
    (text, sentences, true)
}

/// Cache-first policy fetch. A live cache entry costs no network call; a miss does
/// exactly one GET and persists the page only when the status is 2xx.
pub fn fetch_policy(url: &str, cache: &CacheStore, fetcher: &dyn HttpGet) -> Result<PolicyDocument, FetchError> {
    let normalized = normalize_url(url)?;
    let key = cache_key(&normalized);
    let lock = cache.key_lock(&key);
    let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());

    let now = SystemTime::now();
    if let Some((entry, html)) = cache.lookup(&normalized, now)? {
        return Ok(PolicyDocument::from_html(normalized, html, entry.stored_at, true));
    }
    let resp = fetcher.get(&normalized).map_err(FetchError::Transport)?;
    if !(200..300).contains(&resp.status) {
        return Err(FetchError::Status { status: resp.status });
    }
    let entry = cache.store(&normalized, &resp.body, now)?;
    Ok(PolicyDocument::from_html(normalized, resp.body, entry.stored_at, false))
}
