//! Pluggable clients for the two external capabilities the pipeline
//! needs — chat completion and web search — plus image retrieval, each
//! with a deterministic fixture-backed mode so the whole pipeline runs
//! offline in tests.

mod calllog;
mod chat;
mod describe;
mod error;
mod fixture;
mod image;
mod net;
mod search;

pub use calllog::{CallLog, CallRecord, Channel, Transport};
pub use chat::{
    complete_chat, ChatBackend, ChatMessage, ChatRequest, ChatResponse, HttpChatBackend,
    MessagePart, MessageRole, ResponseFormat,
};
pub use describe::{describe_slide_images, SlideImageDescriptions};
pub use error::{GatewayError, Result};
pub use fixture::{
    FixtureChatBackend, FixtureImageFetcher, FixtureSearchProvider, FixtureStore, TranscriptEntry,
};
pub use image::{
    fetch_image, HttpImageFetcher, ImageAsset, ImageFetcher, ImageSource, LocalImageFetcher,
    SUPPORTED_IMAGE_TYPES,
};
pub use search::{
    search_many, search_web, HttpSearchProvider, SearchProvider, SearchResult,
    DEFAULT_MAX_RESULTS,
};
