use thiserror::Error;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("transport failure{}: {detail}", fmt_status(.status))]
    Transport { status: Option<u16>, detail: String },

    #[error("fixture has no entry for {key}{}", fmt_digest(.digest))]
    FixtureMiss { key: String, digest: Option<String> },

    #[error("fixture directory is unusable: {path}: {detail}")]
    BadFixture { path: String, detail: String },

    #[error("search query is empty")]
    EmptyQuery,

    #[error("could not fetch image {src}: {reason}")]
    FetchFailed { src: String, reason: String },

    #[error("unsupported image type: {detected}")]
    UnsupportedImageType { detected: String },

    #[error(transparent)]
    Deck(#[from] deck_core::DeckError),
}

fn fmt_status(status: &Option<u16>) -> String {
    match status {
        Some(s) => format!(" (HTTP {s})"),
        None => String::new(),
    }
}

fn fmt_digest(digest: &Option<String>) -> String {
    match digest {
        Some(d) => format!(" (prompt digest {d})"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, GatewayError>;
