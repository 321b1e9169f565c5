//! The validator: deterministic structural postcondition checks, one per
//! instruction, plus digest comparison for KEEP slides. No LLM critique
//! is involved; a discrepancy names the instruction it belongs to.

use std::collections::HashSet;

use deck_core::{DeckDocument, Slide};
use planning::{Action, AtomicOperation, ExecutionPlan, ImagePlacement};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::apply::placement_bounds;
use crate::digest::digest_bytes;

/// Geometry tolerance for matching added elements.
pub const BOX_TOLERANCE_EMU: i64 = 1;

/// Pre-execution snapshot: one digest per source slide over its modeled
/// content (ids, texts, fonts, boxes, image types and bytes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlideDigests {
    digests: Vec<String>,
}

impl SlideDigests {
    pub fn capture(deck: &DeckDocument) -> Self {
        SlideDigests {
            digests: deck
                .slides()
                .iter()
                .map(|s| slide_digest(deck, s))
                .collect(),
        }
    }

    pub fn get(&self, index: usize) -> Option<&str> {
        self.digests.get(index).map(String::as_str)
    }
}

pub(crate) fn slide_digest(deck: &DeckDocument, slide: &Slide) -> String {
    let mut hasher = Sha256::new();
    for t in slide.texts() {
        hasher.update(b"T|");
        hasher.update(t.id.as_str().as_bytes());
        for run in &t.runs {
            hasher.update(b"r:");
            hasher.update(run.text.as_bytes());
            hasher.update(format!("{:?}", run.font).as_bytes());
        }
        hasher.update(format!("{:?}", t.bounds).as_bytes());
    }
    for i in slide.images() {
        hasher.update(b"I|");
        hasher.update(i.id.as_str().as_bytes());
        hasher.update(i.content_type.as_bytes());
        hasher.update(format!("{:?}", i.bounds).as_bytes());
        if let Some(bytes) = deck.media_bytes(&i.media_path) {
            hasher.update(digest_bytes(bytes).as_bytes());
        }
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub target_index: usize,
    /// Position of the instruction within its mapping; `None` for KEEP
    /// digest mismatches, which have no instruction.
    pub instruction_index: Option<usize>,
    pub expected: String,
    pub observed: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub discrepancies: Vec<Discrepancy>,
}

impl ValidationReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Check the adapted deck against every instruction of the plan and the
/// pre-state snapshot for KEEP slides. Purely structural and
/// deterministic; returns a report instead of failing.
pub fn validate_outcome(
    deck_after: &DeckDocument,
    plan: &ExecutionPlan,
    pre: &SlideDigests,
) -> ValidationReport {
    let mut discrepancies = Vec::new();

    for mapping in &plan.slides {
        let t = mapping.target_index;
        let Ok(slide) = deck_after.slide(t) else {
            discrepancies.push(Discrepancy {
                target_index: t,
                instruction_index: None,
                expected: "target slide exists".to_string(),
                observed: format!("deck has {} slides", deck_after.slide_count()),
            });
            continue;
        };

        if mapping.action == Action::Keep {
            let source = mapping.source_index.expect("validated plan");
            let expected = pre.get(source).unwrap_or("<no snapshot>");
            let observed = slide_digest(deck_after, slide);
            if observed != expected {
                discrepancies.push(Discrepancy {
                    target_index: t,
                    instruction_index: None,
                    expected: format!("KEEP slide digest {expected}"),
                    observed: format!("digest {observed}"),
                });
            }
            continue;
        }

        // One-to-one matching for added elements, so two identical adds
        // need two matching elements.
        let mut consumed: HashSet<String> = HashSet::new();
        for (i, op) in mapping.instructions.iter().enumerate() {
            if let Some(problem) = check_op(deck_after, slide, op, &mut consumed) {
                discrepancies.push(Discrepancy {
                    target_index: t,
                    instruction_index: Some(i),
                    expected: problem.0,
                    observed: problem.1,
                });
            }
        }
    }

    ValidationReport {
        pass: discrepancies.is_empty(),
        discrepancies,
    }
}

fn check_op(
    deck: &DeckDocument,
    slide: &Slide,
    op: &AtomicOperation,
    consumed: &mut HashSet<String>,
) -> Option<(String, String)> {
    match op {
        AtomicOperation::DeleteText { element_id } | AtomicOperation::DeleteImage { element_id } => {
            if slide.has_element(element_id) {
                Some((
                    format!("element {element_id} deleted"),
                    "element still present".to_string(),
                ))
            } else {
                None
            }
        }
        AtomicOperation::ReplaceText {
            element_id,
            new_text,
        } => match slide.find_text(element_id) {
            None => Some((
                format!("element {element_id} present with replaced text"),
                "element missing".to_string(),
            )),
            Some(t) if t.text() != *new_text => Some((
                format!("element {element_id} text {new_text:?}"),
                format!("text {:?}", t.text()),
            )),
            Some(_) => None,
        },
        AtomicOperation::AddTextBox { text, bounds, .. } => {
            let expected = bounds.clamped();
            let found = slide.texts().into_iter().find(|t| {
                !consumed.contains(t.id.as_str())
                    && t.text() == *text
                    && t.bounds.approx_eq(&expected, BOX_TOLERANCE_EMU)
            });
            match found {
                Some(t) => {
                    consumed.insert(t.id.as_str().to_string());
                    None
                }
                None => Some((
                    format!("a text box {text:?} at {expected:?}"),
                    "no unconsumed matching text box".to_string(),
                )),
            }
        }
        AtomicOperation::ReplaceImage { element_id, source } => {
            let Some(img) = slide.find_image(element_id) else {
                return Some((
                    format!("image element {element_id} present"),
                    "element missing".to_string(),
                ));
            };
            // An inline source pins the expected bytes; URL and path
            // payloads are not recoverable here, so existence suffices.
            let expected = inline_source_digest(source)?;
            let observed = deck
                .media_bytes(&img.media_path)
                .map(digest_bytes)
                .unwrap_or_default();
            if observed == expected {
                None
            } else {
                Some((
                    format!("element {element_id} media digest {expected}"),
                    format!("media digest {observed}"),
                ))
            }
        }
        AtomicOperation::AddImage { placement, .. } => {
            let found = slide.images().into_iter().find(|img| {
                if consumed.contains(img.id.as_str()) {
                    return false;
                }
                image_matches_placement(deck, img, placement)
            });
            match found {
                Some(img) => {
                    consumed.insert(img.id.as_str().to_string());
                    None
                }
                None => Some((
                    format!("an image at {placement:?}"),
                    "no unconsumed matching image".to_string(),
                )),
            }
        }
    }
}

fn inline_source_digest(source: &gateways::ImageSource) -> Option<String> {
    use base64::Engine;
    match source {
        gateways::ImageSource::Base64(b) => {
            let cleaned: String = b.chars().filter(|c| !c.is_whitespace()).collect();
            base64::engine::general_purpose::STANDARD
                .decode(cleaned.as_bytes())
                .ok()
                .map(|bytes| digest_bytes(&bytes))
        }
        _ => None,
    }
}

fn image_matches_placement(
    deck: &DeckDocument,
    img: &deck_core::ImageElement,
    placement: &ImagePlacement,
) -> bool {
    match placement {
        ImagePlacement::Box(b) => img.bounds.approx_eq(&b.clamped(), BOX_TOLERANCE_EMU),
        ImagePlacement::Scaled { .. } => {
            // The element's own media carries the intrinsic size, so the
            // expected box is recomputable without refetching the asset.
            let Some(bytes) = deck.media_bytes(&img.media_path) else {
                return false;
            };
            let asset = gateways::ImageAsset {
                source: String::new(),
                bytes: bytes.to_vec(),
                content_type: img.content_type.clone(),
            };
            match placement_bounds(placement, &asset) {
                Ok(expected) => img.bounds.approx_eq(&expected, BOX_TOLERANCE_EMU),
                Err(_) => false,
            }
        }
    }
}
