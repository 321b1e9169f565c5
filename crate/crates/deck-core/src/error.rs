use thiserror::Error;

use crate::model::ElementId;

#[derive(Debug, Error)]
pub enum DeckError {
    #[error("input is not a ZIP archive: {0}")]
    NotZip(String),

    #[error("archive has no ppt/presentation.xml part")]
    MissingPresentationPart,

    #[error("malformed slide XML in {path}: {detail}")]
    MalformedSlideXml { path: String, detail: String },

    #[error("slide index {index} out of range (deck has {count} slides)")]
    SlideIndexOutOfRange { index: usize, count: usize },

    #[error("no element {0} on this slide")]
    UnknownElement(ElementId),

    #[error("serialization failed: {0}")]
    SerializationError(String),
}

pub type Result<T> = std::result::Result<T, DeckError>;
