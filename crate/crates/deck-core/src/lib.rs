//! Presentation model and PPTX I/O for the slide adaptation pipeline.
//!
//! The crate models exactly the subset of OOXML the pipeline edits:
//! top-level text boxes/placeholders and pictures on each slide, with
//! their geometry and fonts. Every other archive entry — themes, masters,
//! notes, animations, grouped shapes, tables — is carried as opaque bytes
//! and written back untouched.

mod build;
mod error;
mod model;
mod parse;
mod serialize;
mod xmlgen;

pub use build::{tiny_gif, tiny_png, DeckBuilder, SlideSpec};
pub use error::{DeckError, Result};
pub use model::{
    runs_from_text, BoundingBox, DeckDocument, DeckModel, DeckSummary, ElementId, FontSpec,
    ImageElement, ImageModel, Slide, SlideModel, SlideSummary, TextElement, TextModel, TextRun,
    EMU_PER_INCH, EMU_PER_PIXEL,
};
pub use parse::{load_deck, sniff_image_type};
pub use serialize::save_deck;

/// Deterministic prompt-side representation of a deck.
pub fn deck_summary(deck: &DeckDocument) -> DeckSummary {
    deck.summary()
}

/// Text of every modeled text element on a slide, in document order.
pub fn extract_slide_text(
    deck: &DeckDocument,
    slide_index: usize,
) -> Result<Vec<(ElementId, String)>> {
    deck.extract_slide_text(slide_index)
}

/// Inventory of the modeled images on a slide, in document order.
pub fn list_slide_images(
    deck: &DeckDocument,
    slide_index: usize,
) -> Result<Vec<(ElementId, String, BoundingBox)>> {
    deck.list_slide_images(slide_index)
}
