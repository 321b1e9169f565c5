//! Web-search provider abstraction.
//!
//! Wire shape (live mode): `POST {endpoint}` with `{query, max_results}`,
//! reply `{results: [{title, url, content, images}]}`.

use serde::{Deserialize, Serialize};

use crate::calllog::{CallLog, Channel, Transport};
use crate::error::{GatewayError, Result};
use crate::net::with_retries;

pub const DEFAULT_MAX_RESULTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub title: String,
    pub url: String,
    pub snippet: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub image_urls: Vec<String>,
}

pub trait SearchProvider: Send + Sync {
    fn search(&self, query: &str, max_results: usize) -> Result<Vec<SearchResult>>;
}

/// Run one query against the provider, capped at `max_results`. Results
/// without an absolute http(s) URL are dropped.
pub fn search_web(
    provider: &dyn SearchProvider,
    query: &str,
    max_results: usize,
) -> Result<Vec<SearchResult>> {
    if query.trim().is_empty() {
        return Err(GatewayError::EmptyQuery);
    }
    let mut results = provider.search(query, max_results)?;
    results.retain(|r| r.url.starts_with("http://") || r.url.starts_with("https://"));
    results.truncate(max_results);
    Ok(results)
}

/// Fan several queries out with bounded parallelism, preserving input
/// order in the output.
pub fn search_many(
    provider: &dyn SearchProvider,
    queries: &[String],
    max_results: usize,
    parallelism: usize,
) -> Vec<(String, Result<Vec<SearchResult>>)> {
    let parallelism = parallelism.max(1);
    let mut out: Vec<Option<(String, Result<Vec<SearchResult>>)>> =
        (0..queries.len()).map(|_| None).collect();
    for (chunk_idx, chunk) in queries.chunks(parallelism).enumerate() {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|q| scope.spawn(move || search_web(provider, q, max_results)))
                .collect();
            for (i, handle) in handles.into_iter().enumerate() {
                let result = handle.join().expect("search worker panicked");
                let qi = chunk_idx * parallelism + i;
                out[qi] = Some((queries[qi].clone(), result));
            }
        });
    }
    out.into_iter().map(|s| s.expect("slot filled")).collect()
}

pub struct HttpSearchProvider {
    endpoint: String,
    api_key: String,
    client: reqwest::blocking::Client,
    log: CallLog,
}

impl HttpSearchProvider {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>, log: CallLog) -> Self {
        HttpSearchProvider {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            client: reqwest::blocking::Client::new(),
            log,
        }
    }
}

impl SearchProvider for HttpSearchProvider {
    fn search(&self, query: &str, max_results: usize) -> Result<Vec<SearchResult>> {
        self.log.record(Channel::Search, Transport::Http, query);
        let body = serde_json::json!({"query": query, "max_results": max_results});
        let value: serde_json::Value = with_retries(|| {
            let resp = self
                .client
                .post(&self.endpoint)
                .bearer_auth(&self.api_key)
                .json(&body)
                .send()
                .map_err(|e| GatewayError::Transport {
                    status: None,
                    detail: e.to_string(),
                })?;
            let status = resp.status();
            let text = resp.text().unwrap_or_default();
            if !status.is_success() {
                return Err(GatewayError::Transport {
                    status: Some(status.as_u16()),
                    detail: crate::chat::excerpt(&text),
                });
            }
            serde_json::from_str(&text).map_err(|e| GatewayError::Transport {
                status: Some(status.as_u16()),
                detail: format!("unparseable response body: {e}"),
            })
        })?;

        let results = value["results"].as_array().cloned().unwrap_or_default();
        Ok(results
            .iter()
            .filter_map(|r| {
                Some(SearchResult {
                    title: r["title"].as_str().unwrap_or_default().to_string(),
                    url: r["url"].as_str()?.to_string(),
                    snippet: r["content"].as_str().unwrap_or_default().to_string(),
                    image_urls: r["images"]
                        .as_array()
                        .map(|a| {
                            a.iter()
                                .filter_map(|v| v.as_str().map(str::to_string))
                                .collect()
                        })
                        .unwrap_or_default(),
                })
            })
            .collect())
    }
}
