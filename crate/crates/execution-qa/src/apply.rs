//! The executor: interpret a validated plan against the deck.
//!
//! Restructuring happens first (KEEP/MODIFY slides cloned from their
//! sources, ADD slides created empty), so instructions always run against
//! the output deck where target index equals slide index. Per-operation
//! failures become log entries, never aborts: partial application is
//! visible, not silent.

use deck_core::{BoundingBox, DeckDocument, Slide, EMU_PER_PIXEL};
use gateways::{ImageAsset, ImageFetcher, ImageSource};
use planning::{validate_plan, Action, AtomicOperation, ExecutionPlan, ImagePlacement};
use serde::{Deserialize, Serialize};

use crate::digest::{digest_bytes, digest_text};
use crate::error::{ExecutionError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ApplyOutcome {
    Applied,
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplyEntry {
    pub target_index: usize,
    pub instruction_index: usize,
    pub op: AtomicOperation,
    pub outcome: ApplyOutcome,
    /// Digest of the applied payload (normalized text, or asset bytes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_digest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetRecord {
    pub source: ImageSource,
    pub len: usize,
}

/// One entry per instruction, in plan order, plus every asset fetched.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ApplyLog {
    pub entries: Vec<ApplyEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assets_fetched: Vec<AssetRecord>,
}

impl ApplyLog {
    pub fn failed_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e.outcome, ApplyOutcome::Failed { .. }))
            .count()
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("log serializes")
    }
}

/// Decides whether an instruction executes; used by fault-injection
/// tests to skip specific instructions.
pub type ApplyHook<'a> = dyn FnMut(usize, usize) -> bool + 'a;

/// Apply a validated plan, returning the adapted deck and the log.
pub fn apply_plan(
    deck: &DeckDocument,
    plan: &ExecutionPlan,
    assets: &dyn ImageFetcher,
) -> Result<(DeckDocument, ApplyLog)> {
    apply_plan_with_hook(deck, plan, assets, &mut |_, _| true)
}

/// `apply_plan` with a per-instruction execute/skip decision.
pub fn apply_plan_with_hook(
    deck: &DeckDocument,
    plan: &ExecutionPlan,
    assets: &dyn ImageFetcher,
    hook: &mut ApplyHook<'_>,
) -> Result<(DeckDocument, ApplyLog)> {
    let problems = validate_plan(plan, deck);
    if !problems.is_empty() {
        return Err(ExecutionError::PlanNotValidated(problems));
    }

    let mut out = deck.clone();
    let slides = restructured_slides(deck, plan)?;
    out.restructure(slides);

    let mut log = ApplyLog::default();
    for mapping in &plan.slides {
        for (i, op) in mapping.instructions.iter().enumerate() {
            let entry = if hook(mapping.target_index, i) {
                match apply_op(&mut out, mapping.target_index, op, assets, &mut log.assets_fetched)
                {
                    Ok(digest) => ApplyEntry {
                        target_index: mapping.target_index,
                        instruction_index: i,
                        op: op.clone(),
                        outcome: ApplyOutcome::Applied,
                        payload_digest: digest,
                    },
                    Err(err) => ApplyEntry {
                        target_index: mapping.target_index,
                        instruction_index: i,
                        op: op.clone(),
                        outcome: ApplyOutcome::Failed {
                            reason: err.to_string(),
                        },
                        payload_digest: None,
                    },
                }
            } else {
                ApplyEntry {
                    target_index: mapping.target_index,
                    instruction_index: i,
                    op: op.clone(),
                    outcome: ApplyOutcome::Failed {
                        reason: "skipped by hook".to_string(),
                    },
                    payload_digest: None,
                }
            };
            log.entries.push(entry);
        }
    }
    Ok((out, log))
}

fn restructured_slides(deck: &DeckDocument, plan: &ExecutionPlan) -> Result<Vec<Slide>> {
    let mut slides = Vec::with_capacity(plan.slides.len());
    for (position, mapping) in plan.slides.iter().enumerate() {
        let slide = match mapping.action {
            Action::Keep | Action::Modify => {
                let source = mapping.source_index.expect("validated");
                deck.clone_slide(source)?
            }
            Action::Add => {
                let layout = nearest_layout(deck, plan, position);
                deck.new_slide(layout, &format!("s{}", mapping.target_index))
            }
        };
        slides.push(slide);
    }
    Ok(slides)
}

/// Layout for an ADD slide: the layout of the nearest preceding mapping
/// with a source, falling back to the deck's first slide.
fn nearest_layout(deck: &DeckDocument, plan: &ExecutionPlan, position: usize) -> Option<String> {
    plan.slides[..position]
        .iter()
        .rev()
        .filter_map(|m| m.source_index)
        .filter_map(|s| deck.slide(s).ok())
        .filter_map(|s| s.layout_ref().map(str::to_string))
        .next()
        .or_else(|| {
            deck.slide(0)
                .ok()
                .and_then(|s| s.layout_ref().map(str::to_string))
        })
}

/// Interpret a text-variant operation against a slide of the deck.
pub fn apply_text_op(
    deck: &mut DeckDocument,
    slide_index: usize,
    op: &AtomicOperation,
) -> Result<Option<String>> {
    match op {
        AtomicOperation::DeleteText { element_id } => {
            deck.slide_mut(slide_index)?.remove_text(element_id)?;
            Ok(None)
        }
        AtomicOperation::ReplaceText {
            element_id,
            new_text,
        } => {
            deck.slide_mut(slide_index)?.replace_text(element_id, new_text)?;
            Ok(Some(digest_text(new_text)))
        }
        AtomicOperation::AddTextBox { text, bounds, font } => {
            deck.slide_mut(slide_index)?
                .add_text_box(text, *bounds, font.clone());
            Ok(Some(digest_text(text)))
        }
        other => Err(ExecutionError::WrongOpKind {
            expected: "text",
            got: other.kind_name(),
        }),
    }
}

/// Interpret an image-variant operation against a slide of the deck.
pub fn apply_image_op(
    deck: &mut DeckDocument,
    slide_index: usize,
    op: &AtomicOperation,
    assets: &dyn ImageFetcher,
    fetched: &mut Vec<AssetRecord>,
) -> Result<Option<String>> {
    match op {
        AtomicOperation::DeleteImage { element_id } => {
            deck.slide_mut(slide_index)?.remove_image(element_id)?;
            Ok(None)
        }
        AtomicOperation::ReplaceImage { element_id, source } => {
            // Resolve the asset before touching the deck so a failed fetch
            // leaves the slide unchanged.
            deck.slide(slide_index)?;
            let asset = fetch(assets, source, fetched)?;
            let digest = digest_bytes(&asset.bytes);
            let path = deck.add_media(asset.bytes, &asset.content_type);
            deck.slide_mut(slide_index)?
                .replace_image(element_id, path, asset.content_type)?;
            Ok(Some(digest))
        }
        AtomicOperation::AddImage { source, placement } => {
            deck.slide(slide_index)?;
            let asset = fetch(assets, source, fetched)?;
            let digest = digest_bytes(&asset.bytes);
            let bounds = placement_bounds(placement, &asset)?;
            let path = deck.add_media(asset.bytes, &asset.content_type);
            deck.slide_mut(slide_index)?
                .add_image(path, asset.content_type, bounds);
            Ok(Some(digest))
        }
        other => Err(ExecutionError::WrongOpKind {
            expected: "image",
            got: other.kind_name(),
        }),
    }
}

fn apply_op(
    deck: &mut DeckDocument,
    slide_index: usize,
    op: &AtomicOperation,
    assets: &dyn ImageFetcher,
    fetched: &mut Vec<AssetRecord>,
) -> Result<Option<String>> {
    match op {
        AtomicOperation::DeleteText { .. }
        | AtomicOperation::ReplaceText { .. }
        | AtomicOperation::AddTextBox { .. } => apply_text_op(deck, slide_index, op),
        _ => apply_image_op(deck, slide_index, op, assets, fetched),
    }
}

fn fetch(
    assets: &dyn ImageFetcher,
    source: &ImageSource,
    fetched: &mut Vec<AssetRecord>,
) -> Result<ImageAsset> {
    let asset = assets.fetch(source)?;
    fetched.push(AssetRecord {
        source: source.clone(),
        len: asset.bytes.len(),
    });
    Ok(asset)
}

/// Box for an added image. A scaled placement multiplies the intrinsic
/// pixel size at 96 DPI (9525 EMU per pixel).
pub fn placement_bounds(placement: &ImagePlacement, asset: &ImageAsset) -> Result<BoundingBox> {
    match placement {
        ImagePlacement::Box(b) => Ok(b.clamped()),
        ImagePlacement::Scaled { x, y, scale } => {
            let (w_px, h_px) = intrinsic_dimensions(&asset.bytes)?;
            let w = (w_px as f64 * scale * EMU_PER_PIXEL as f64).round() as i64;
            let h = (h_px as f64 * scale * EMU_PER_PIXEL as f64).round() as i64;
            Ok(BoundingBox::new(*x, *y, w, h).clamped())
        }
    }
}

pub(crate) fn intrinsic_dimensions(bytes: &[u8]) -> Result<(u32, u32)> {
    image::ImageReader::new(std::io::Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| ExecutionError::ImageDimensions(e.to_string()))?
        .into_dimensions()
        .map_err(|e| ExecutionError::ImageDimensions(e.to_string()))
}
