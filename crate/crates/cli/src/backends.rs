//! Backend wiring: fixture replay when `--fixtures` is set, live HTTP
//! clients otherwise. Offline runs construct no HTTP client at all.

use gateways::{
    CallLog, ChatBackend, FixtureStore, GatewayError, HttpChatBackend, HttpImageFetcher,
    HttpSearchProvider, ImageFetcher, SearchProvider, SearchResult,
};

use crate::config::{ConfigError, RunConfig, ENV_LLM_API_KEY, ENV_LLM_ENDPOINT, ENV_LLM_MODEL};

pub struct Backends {
    pub chat: Box<dyn ChatBackend>,
    pub search: Box<dyn SearchProvider>,
    pub images: Box<dyn ImageFetcher>,
    pub log: CallLog,
}

pub fn build_backends(cfg: &RunConfig) -> anyhow::Result<Backends> {
    let log = CallLog::new();
    if let Some(dir) = &cfg.fixtures {
        let store = FixtureStore::load(dir)?;
        return Ok(Backends {
            chat: Box::new(store.chat_backend(log.clone())),
            search: Box::new(store.search_provider(log.clone())),
            images: Box::new(store.image_fetcher(log.clone())),
            log,
        });
    }

    let endpoint = cfg
        .llm_endpoint
        .clone()
        .ok_or(ConfigError::Missing(ENV_LLM_ENDPOINT))?;
    let api_key = cfg
        .llm_api_key
        .clone()
        .ok_or(ConfigError::Missing(ENV_LLM_API_KEY))?;
    let model = cfg
        .llm_model
        .clone()
        .ok_or(ConfigError::Missing(ENV_LLM_MODEL))?;

    let search: Box<dyn SearchProvider> =
        match (cfg.search_endpoint.clone(), cfg.search_api_key.clone()) {
            (Some(endpoint), Some(key)) => {
                Box::new(HttpSearchProvider::new(endpoint, key, log.clone()))
            }
            _ => Box::new(UnconfiguredSearch),
        };

    Ok(Backends {
        chat: Box::new(HttpChatBackend::new(endpoint, api_key, model, log.clone())),
        search,
        images: Box::new(HttpImageFetcher::new(log.clone())),
        log,
    })
}

/// Placeholder provider for live runs without search credentials; only
/// errors if the pipeline actually asks for a search.
struct UnconfiguredSearch;

impl SearchProvider for UnconfiguredSearch {
    fn search(&self, _query: &str, _max: usize) -> gateways::Result<Vec<SearchResult>> {
        Err(GatewayError::Transport {
            status: None,
            detail: "search requested but SEARCH_ENDPOINT/SEARCH_API_KEY are not set".to_string(),
        })
    }
}
