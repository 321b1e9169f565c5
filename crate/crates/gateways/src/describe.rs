//! Semantic descriptions of a slide's embedded images.
//!
//! The request carries the slide's extracted text as context plus the
//! embedded image parts themselves (not a rendered screenshot of the
//! slide), and asks for one description line per image, in order.

use deck_core::{DeckDocument, ElementId};

use crate::chat::{ChatBackend, ChatRequest, MessagePart};
use crate::error::Result;

/// Image formats the vision channel accepts. GIFs are skipped with a
/// warning rather than sent.
const VISION_TYPES: [&str; 2] = ["image/png", "image/jpeg"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SlideImageDescriptions {
    pub descriptions: Vec<(ElementId, String)>,
    pub warnings: Vec<String>,
}

pub fn describe_slide_images(
    backend: &dyn ChatBackend,
    deck: &DeckDocument,
    slide_index: usize,
) -> Result<SlideImageDescriptions> {
    let inventory = deck.list_slide_images(slide_index)?;
    let mut out = SlideImageDescriptions::default();
    if inventory.is_empty() {
        return Ok(out);
    }

    let slide = deck.slide(slide_index)?;
    let mut sendable: Vec<(ElementId, Vec<u8>, String)> = Vec::new();
    for (id, content_type, _) in &inventory {
        if !VISION_TYPES.contains(&content_type.as_str()) {
            out.warnings
                .push(format!("{id}: {content_type} not supported for description, skipped"));
            continue;
        }
        let element = slide.find_image(id).expect("inventory id resolves");
        match deck.media_bytes(&element.media_path) {
            Some(bytes) => sendable.push((id.clone(), bytes.to_vec(), content_type.clone())),
            None => out
                .warnings
                .push(format!("{id}: media part {} missing, skipped", element.media_path)),
        }
    }
    if sendable.is_empty() {
        return Ok(out);
    }

    let slide_text = deck
        .extract_slide_text(slide_index)?
        .into_iter()
        .map(|(_, t)| t)
        .collect::<Vec<_>>()
        .join("\n");
    let mut parts = vec![MessagePart::Text(format!(
        "Slide {slide_index} text for context:\n{slide_text}\n\n\
Describe each attached image in one line. Reply with exactly {} lines, \
one per image, in the order given, and nothing else.",
        sendable.len()
    ))];
    for (_, bytes, content_type) in &sendable {
        parts.push(MessagePart::Image {
            bytes: bytes.clone(),
            content_type: content_type.clone(),
        });
    }
    let req = ChatRequest::new("describe")
        .system("You describe presentation images factually and concisely.")
        .user_parts(parts);
    let resp = backend.complete(&req)?;

    let mut lines = resp.text.lines().map(str::trim).filter(|l| !l.is_empty());
    for (id, _, _) in &sendable {
        match lines.next() {
            Some(line) => out.descriptions.push((id.clone(), line.to_string())),
            None => out
                .warnings
                .push(format!("{id}: no description line in the reply, skipped")),
        }
    }
    Ok(out)
}
