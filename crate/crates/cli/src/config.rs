//! Run configuration. Precedence: command-line flags, then environment
//! variables, then the TOML config file, then defaults.

use std::path::{Path, PathBuf};

use planning::Mode;
use serde::Deserialize;
use thiserror::Error;

pub const ENV_LLM_API_KEY: &str = "LLM_API_KEY";
pub const ENV_SEARCH_API_KEY: &str = "SEARCH_API_KEY";
pub const ENV_LLM_ENDPOINT: &str = "LLM_ENDPOINT";
pub const ENV_LLM_MODEL: &str = "LLM_MODEL";
pub const ENV_SEARCH_ENDPOINT: &str = "SEARCH_ENDPOINT";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config error: {0} is not set")]
    Missing(&'static str),

    #[error("config file {path}: {detail}")]
    BadFile { path: String, detail: String },

    #[error("config error: max_validate_iters must be at least 1")]
    BadIterBound,

    #[error("config error: pass exactly one of --request or --request-file")]
    AmbiguousRequest,
}

/// Keys accepted in the `key = value` config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub llm_endpoint: Option<String>,
    pub llm_model: Option<String>,
    pub llm_api_key: Option<String>,
    pub search_endpoint: Option<String>,
    pub search_api_key: Option<String>,
    pub max_validate_iters: Option<usize>,
    pub parallelism: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let raw = std::fs::read_to_string(path).map_err(|e| ConfigError::BadFile {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        toml::from_str(&raw).map_err(|e| ConfigError::BadFile {
            path: path.display().to_string(),
            detail: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeChoice {
    Auto,
    Recompose,
    Refine,
}

impl ModeChoice {
    pub fn forced(&self) -> Option<Mode> {
        match self {
            ModeChoice::Auto => None,
            ModeChoice::Recompose => Some(Mode::Recompose),
            ModeChoice::Refine => Some(Mode::Refine),
        }
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub fixtures: Option<PathBuf>,
    pub llm_endpoint: Option<String>,
    pub llm_model: Option<String>,
    pub llm_api_key: Option<String>,
    pub search_endpoint: Option<String>,
    pub search_api_key: Option<String>,
    pub max_validate_iters: usize,
    pub parallelism: usize,
}

pub struct ConnectionFlags {
    pub fixtures: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub llm_endpoint: Option<String>,
    pub llm_model: Option<String>,
    pub search_endpoint: Option<String>,
    pub max_validate_iters: Option<usize>,
    pub parallelism: Option<usize>,
}

fn env_var(name: &str) -> Option<String> {
    std::env::var(name).ok().filter(|v| !v.is_empty())
}

impl RunConfig {
    /// Merge flags over environment over file over defaults.
    pub fn resolve(flags: ConnectionFlags) -> Result<Self, ConfigError> {
        let file = FileConfig::load(flags.config.as_deref())?;
        let max_validate_iters = flags
            .max_validate_iters
            .or(file.max_validate_iters)
            .unwrap_or(3);
        if max_validate_iters == 0 {
            return Err(ConfigError::BadIterBound);
        }
        Ok(RunConfig {
            fixtures: flags.fixtures,
            llm_endpoint: flags
                .llm_endpoint
                .or_else(|| env_var(ENV_LLM_ENDPOINT))
                .or(file.llm_endpoint),
            llm_model: flags
                .llm_model
                .or_else(|| env_var(ENV_LLM_MODEL))
                .or(file.llm_model),
            llm_api_key: env_var(ENV_LLM_API_KEY).or(file.llm_api_key),
            search_endpoint: flags
                .search_endpoint
                .or_else(|| env_var(ENV_SEARCH_ENDPOINT))
                .or(file.search_endpoint),
            search_api_key: env_var(ENV_SEARCH_API_KEY).or(file.search_api_key),
            max_validate_iters,
            parallelism: flags.parallelism.or(file.parallelism).unwrap_or(4).max(1),
        })
    }
}

/// The instructor request, from inline text or a file.
pub fn resolve_request_text(
    request: Option<String>,
    request_file: Option<&Path>,
) -> anyhow::Result<String> {
    match (request, request_file) {
        (Some(text), None) => Ok(text),
        (None, Some(path)) => Ok(std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read request file {}: {e}", path.display()))?
            .trim()
            .to_string()),
        _ => Err(ConfigError::AmbiguousRequest.into()),
    }
}

/// Load instructor materials from a directory: images become path
/// references, everything else is read as text. Sorted by file name.
pub fn load_materials(dir: Option<&Path>) -> anyhow::Result<planning::MaterialSet> {
    let Some(dir) = dir else {
        return Ok(planning::MaterialSet::default());
    };
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| anyhow::anyhow!("cannot read materials dir {}: {e}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    entries.sort();

    let mut items = Vec::new();
    for path in entries {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_default();
        let ext = path
            .extension()
            .map(|e| e.to_string_lossy().to_ascii_lowercase())
            .unwrap_or_default();
        let item = if matches!(ext.as_str(), "png" | "jpg" | "jpeg" | "gif") {
            planning::MaterialItem {
                name,
                kind: planning::MaterialKind::ImagePath,
                content: path.display().to_string(),
            }
        } else {
            planning::MaterialItem {
                name,
                kind: planning::MaterialKind::Text,
                content: std::fs::read_to_string(&path).map_err(|e| {
                    anyhow::anyhow!("cannot read material {}: {e}", path.display())
                })?,
            }
        };
        items.push(item);
    }
    Ok(planning::MaterialSet { items })
}
