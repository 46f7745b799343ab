use thiserror::Error;
use url::Url;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InvalidUrlError {
    #[error("unparseable url `{0}`")]
    Unparseable(String),
    #[error("unsupported scheme `{0}`: only http and https are accepted")]
    Scheme(String),
    #[error("url `{0}` has no host")]
    NoHost(String),
}

/// Canonical form used as the cache key: lowercase scheme and host, no default
/// port, no fragment, and `/` for an empty path.
pub fn normalize_url(raw: &str) -> Result<String, InvalidUrlError> {
    let mut url = Url::parse(raw.trim()).map_err(|_| InvalidUrlError::Unparseable(raw.to_string()))?;
    if !matches!(url.scheme(), "http" | "https") {
        return Err(InvalidUrlError::Scheme(url.scheme().to_string()));
    }
    if url.host_str().is_none_or(str::is_empty) {
        return Err(InvalidUrlError::NoHost(raw.to_string()));
    }
    url.set_fragment(None);
    Ok(url.to_string())
}
