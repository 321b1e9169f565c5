//! Image asset retrieval from URLs, local paths, or inline base64.

use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::calllog::{CallLog, Channel, Transport};
use crate::error::{GatewayError, Result};
use crate::net::with_retries;

pub const SUPPORTED_IMAGE_TYPES: [&str; 3] = ["image/png", "image/jpeg", "image/gif"];

/// Where an image payload comes from. This is the shape plan files carry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum ImageSource {
    Url(String),
    Path(String),
    Base64(String),
}

impl ImageSource {
    pub fn describe(&self) -> String {
        match self {
            ImageSource::Url(u) => u.clone(),
            ImageSource::Path(p) => p.clone(),
            ImageSource::Base64(_) => "<inline base64>".to_string(),
        }
    }

    /// Cheap syntactic validity check, used by plan validation.
    pub fn is_syntactically_valid(&self) -> bool {
        match self {
            ImageSource::Url(u) => {
                (u.starts_with("http://") || u.starts_with("https://"))
                    && !u.contains(char::is_whitespace)
                    && u.len() > 8
            }
            ImageSource::Path(p) => !p.trim().is_empty(),
            ImageSource::Base64(b) => {
                !b.is_empty()
                    && b.bytes()
                        .all(|c| c.is_ascii_alphanumeric() || matches!(c, b'+' | b'/' | b'=' | b'\n' | b'\r'))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageAsset {
    pub source: String,
    pub bytes: Vec<u8>,
    pub content_type: String,
}

pub trait ImageFetcher: Send + Sync {
    fn fetch(&self, source: &ImageSource) -> Result<ImageAsset>;
}

/// Retrieve the bytes and sniff the content type from magic bytes.
pub fn fetch_image(fetcher: &dyn ImageFetcher, source: &ImageSource) -> Result<ImageAsset> {
    fetcher.fetch(source)
}

pub(crate) fn finish_asset(source: &ImageSource, bytes: Vec<u8>) -> Result<ImageAsset> {
    if bytes.is_empty() {
        return Err(GatewayError::FetchFailed {
            src: source.describe(),
            reason: "empty payload".to_string(),
        });
    }
    let content_type = match deck_core::sniff_image_type(&bytes) {
        Some(ct) => ct.to_string(),
        None => {
            let detected = if looks_like_html(&bytes) {
                "text/html".to_string()
            } else {
                "unknown".to_string()
            };
            return Err(GatewayError::UnsupportedImageType { detected });
        }
    };
    Ok(ImageAsset {
        source: source.describe(),
        bytes,
        content_type,
    })
}

fn looks_like_html(bytes: &[u8]) -> bool {
    let head = &bytes[..bytes.len().min(64)];
    let text = String::from_utf8_lossy(head);
    let trimmed = text.trim_start();
    trimmed.starts_with('<')
}

/// Fetcher for offline contexts: paths and base64 resolve locally, URL
/// sources are refused.
#[derive(Default)]
pub struct LocalImageFetcher {
    base_dir: Option<std::path::PathBuf>,
    log: CallLog,
}

impl LocalImageFetcher {
    pub fn new(log: CallLog) -> Self {
        LocalImageFetcher { base_dir: None, log }
    }

    /// Relative path sources resolve against `dir`.
    pub fn with_base_dir(mut self, dir: impl Into<std::path::PathBuf>) -> Self {
        self.base_dir = Some(dir.into());
        self
    }

    pub(crate) fn fetch_local(&self, source: &ImageSource) -> Result<ImageAsset> {
        match source {
            ImageSource::Path(p) => {
                self.log.record(Channel::Image, Transport::Local, p);
                let path = std::path::Path::new(p);
                let resolved = match (&self.base_dir, path.is_relative()) {
                    (Some(base), true) => base.join(path),
                    _ => path.to_path_buf(),
                };
                let bytes = std::fs::read(&resolved).map_err(|e| GatewayError::FetchFailed {
                    src: p.clone(),
                    reason: e.to_string(),
                })?;
                finish_asset(source, bytes)
            }
            ImageSource::Base64(b) => {
                self.log.record(Channel::Image, Transport::Local, "<base64>");
                let cleaned: String = b.chars().filter(|c| !c.is_whitespace()).collect();
                let bytes = base64::engine::general_purpose::STANDARD
                    .decode(cleaned.as_bytes())
                    .map_err(|e| GatewayError::FetchFailed {
                        src: source.describe(),
                        reason: format!("invalid base64: {e}"),
                    })?;
                finish_asset(source, bytes)
            }
            ImageSource::Url(u) => Err(GatewayError::FetchFailed {
                src: u.clone(),
                reason: "URL sources need live mode or a fixture mapping".to_string(),
            }),
        }
    }
}

impl ImageFetcher for LocalImageFetcher {
    fn fetch(&self, source: &ImageSource) -> Result<ImageAsset> {
        self.fetch_local(source)
    }
}

pub struct HttpImageFetcher {
    client: reqwest::blocking::Client,
    local: LocalImageFetcher,
    log: CallLog,
}

impl HttpImageFetcher {
    pub fn new(log: CallLog) -> Self {
        HttpImageFetcher {
            client: reqwest::blocking::Client::new(),
            local: LocalImageFetcher::new(log.clone()),
            log,
        }
    }
}

impl ImageFetcher for HttpImageFetcher {
    fn fetch(&self, source: &ImageSource) -> Result<ImageAsset> {
        match source {
            ImageSource::Url(u) => {
                self.log.record(Channel::Image, Transport::Http, u);
                let bytes = with_retries(|| {
                    let resp =
                        self.client
                            .get(u)
                            .send()
                            .map_err(|e| GatewayError::Transport {
                                status: None,
                                detail: e.to_string(),
                            })?;
                    let status = resp.status();
                    if !status.is_success() {
                        return Err(GatewayError::Transport {
                            status: Some(status.as_u16()),
                            detail: format!("fetching {u}"),
                        });
                    }
                    resp.bytes()
                        .map(|b| b.to_vec())
                        .map_err(|e| GatewayError::Transport {
                            status: None,
                            detail: e.to_string(),
                        })
                })
                .map_err(|e| GatewayError::FetchFailed {
                    src: u.clone(),
                    reason: e.to_string(),
                })?;
                finish_asset(source, bytes)
            }
            other => self.local.fetch_local(other),
        }
    }
}
