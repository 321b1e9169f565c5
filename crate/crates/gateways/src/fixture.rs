//! Deterministic fixture replay for offline runs.
//!
//! A fixture directory holds:
//!   - `transcripts.json`: ordered chat entries
//!     `[{"tag": ..., "prompt_digest": null | "hexprefix", "response": ...}]`,
//!     consumed exactly once per matching call, FIFO within each tag;
//!   - `search.json`: `{query: [{title, url, snippet, image_urls}]}`,
//!     looked up by the exact query string;
//!   - `images/manifest.json`: `{url: filename}` with the files alongside.
//!
//! An unmatched request is an error, never improvised.

use std::collections::{HashMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Deserialize;

use crate::calllog::{CallLog, Channel, Transport};
use crate::chat::{ChatBackend, ChatRequest, ChatResponse};
use crate::error::{GatewayError, Result};
use crate::image::{finish_asset, ImageAsset, ImageFetcher, ImageSource, LocalImageFetcher};
use crate::search::{SearchProvider, SearchResult};

#[derive(Debug, Clone, Deserialize)]
pub struct TranscriptEntry {
    pub tag: String,
    #[serde(default)]
    pub prompt_digest: Option<String>,
    pub response: String,
}

#[derive(Debug, Default)]
pub struct FixtureStore {
    dir: PathBuf,
    transcripts: Vec<TranscriptEntry>,
    search: HashMap<String, Vec<SearchResult>>,
    image_manifest: HashMap<String, String>,
}

impl FixtureStore {
    /// Load a fixture directory. Missing files mean "no entries of that
    /// kind"; malformed files are an error.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let bad = |path: &Path, detail: String| GatewayError::BadFixture {
            path: path.display().to_string(),
            detail,
        };

        let transcripts_path = dir.join("transcripts.json");
        let transcripts: Vec<TranscriptEntry> = if transcripts_path.exists() {
            let raw = std::fs::read_to_string(&transcripts_path)
                .map_err(|e| bad(&transcripts_path, e.to_string()))?;
            serde_json::from_str(&raw).map_err(|e| bad(&transcripts_path, e.to_string()))?
        } else {
            Vec::new()
        };

        let search_path = dir.join("search.json");
        let search: HashMap<String, Vec<SearchResult>> = if search_path.exists() {
            let raw = std::fs::read_to_string(&search_path)
                .map_err(|e| bad(&search_path, e.to_string()))?;
            serde_json::from_str(&raw).map_err(|e| bad(&search_path, e.to_string()))?
        } else {
            HashMap::new()
        };

        let manifest_path = dir.join("images").join("manifest.json");
        let image_manifest: HashMap<String, String> = if manifest_path.exists() {
            let raw = std::fs::read_to_string(&manifest_path)
                .map_err(|e| bad(&manifest_path, e.to_string()))?;
            serde_json::from_str(&raw).map_err(|e| bad(&manifest_path, e.to_string()))?
        } else {
            HashMap::new()
        };

        Ok(FixtureStore {
            dir,
            transcripts,
            search,
            image_manifest,
        })
    }

    pub fn chat_backend(&self, log: CallLog) -> FixtureChatBackend {
        let mut queues: HashMap<String, VecDeque<TranscriptEntry>> = HashMap::new();
        for entry in &self.transcripts {
            queues.entry(entry.tag.clone()).or_default().push_back(entry.clone());
        }
        FixtureChatBackend {
            queues: Mutex::new(queues),
            log,
        }
    }

    pub fn search_provider(&self, log: CallLog) -> FixtureSearchProvider {
        FixtureSearchProvider {
            map: self.search.clone(),
            log,
        }
    }

    pub fn image_fetcher(&self, log: CallLog) -> FixtureImageFetcher {
        FixtureImageFetcher {
            manifest: self.image_manifest.clone(),
            images_dir: self.dir.join("images"),
            local: LocalImageFetcher::new(log.clone()).with_base_dir(&self.dir),
            log,
        }
    }
}

/// Replays transcript entries; consumption is serialized and exhaustion
/// is an error.
pub struct FixtureChatBackend {
    queues: Mutex<HashMap<String, VecDeque<TranscriptEntry>>>,
    log: CallLog,
}

impl ChatBackend for FixtureChatBackend {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse> {
        self.log.record(Channel::Chat, Transport::Fixture, &req.tag);
        let mut queues = self.queues.lock().unwrap();
        let queue = queues.get_mut(&req.tag);
        let entry = queue.and_then(VecDeque::pop_front).ok_or_else(|| {
            GatewayError::FixtureMiss {
                key: format!("chat stage '{}'", req.tag),
                digest: None,
            }
        })?;
        if let Some(pin) = &entry.prompt_digest {
            let digest = req.prompt_digest();
            if !digest.starts_with(pin.as_str()) {
                return Err(GatewayError::FixtureMiss {
                    key: format!("chat stage '{}'", req.tag),
                    digest: Some(digest),
                });
            }
        }
        Ok(ChatResponse {
            text: entry.response,
            usage: None,
        })
    }
}

pub struct FixtureSearchProvider {
    map: HashMap<String, Vec<SearchResult>>,
    log: CallLog,
}

impl SearchProvider for FixtureSearchProvider {
    fn search(&self, query: &str, _max_results: usize) -> Result<Vec<SearchResult>> {
        self.log.record(Channel::Search, Transport::Fixture, query);
        self.map
            .get(query)
            .cloned()
            .ok_or_else(|| GatewayError::FixtureMiss {
                key: format!("search query '{query}'"),
                digest: None,
            })
    }
}

pub struct FixtureImageFetcher {
    manifest: HashMap<String, String>,
    images_dir: PathBuf,
    local: LocalImageFetcher,
    log: CallLog,
}

impl ImageFetcher for FixtureImageFetcher {
    fn fetch(&self, source: &ImageSource) -> Result<ImageAsset> {
        match source {
            ImageSource::Url(u) => {
                self.log.record(Channel::Image, Transport::Fixture, u);
                let file = self.manifest.get(u).ok_or_else(|| GatewayError::FixtureMiss {
                    key: format!("image url '{u}'"),
                    digest: None,
                })?;
                let path = self.images_dir.join(file);
                let bytes = std::fs::read(&path).map_err(|e| GatewayError::FetchFailed {
                    src: u.clone(),
                    reason: format!("{}: {e}", path.display()),
                })?;
                finish_asset(source, bytes)
            }
            other => self.local.fetch_local(other),
        }
    }
}
