//! The versioned execution plan: an ADD/MODIFY/KEEP mapping from source
//! slides onto target slides, with the atomic operations to run on each.
//!
//! Serialized as JSON with snake_case keys; `version` is mandatory and
//! currently always 1. A source slide that appears in no mapping is
//! dropped from the output deck.

use deck_core::{BoundingBox, DeckDocument, ElementId, FontSpec};
use gateways::ImageSource;
use serde::{Deserialize, Serialize};

use crate::types::Mode;

pub const PLAN_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Add,
    Modify,
    Keep,
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Action::Add => "ADD",
            Action::Modify => "MODIFY",
            Action::Keep => "KEEP",
        })
    }
}

/// Geometry for an added image: either a full box, or a position plus a
/// scale factor applied to the image's intrinsic pixel size at 96 DPI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ImagePlacement {
    Box(BoundingBox),
    Scaled { x: i64, y: i64, scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AtomicOperation {
    DeleteText {
        element_id: ElementId,
    },
    ReplaceText {
        element_id: ElementId,
        new_text: String,
    },
    AddTextBox {
        text: String,
        #[serde(rename = "box")]
        bounds: BoundingBox,
        #[serde(default)]
        font: FontSpec,
    },
    DeleteImage {
        element_id: ElementId,
    },
    ReplaceImage {
        element_id: ElementId,
        source: ImageSource,
    },
    AddImage {
        source: ImageSource,
        placement: ImagePlacement,
    },
}

impl AtomicOperation {
    /// Element the operation targets, when it addresses one by id.
    pub fn element_id(&self) -> Option<&ElementId> {
        match self {
            AtomicOperation::DeleteText { element_id }
            | AtomicOperation::ReplaceText { element_id, .. }
            | AtomicOperation::DeleteImage { element_id }
            | AtomicOperation::ReplaceImage { element_id, .. } => Some(element_id),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            AtomicOperation::DeleteText { .. } => "delete_text",
            AtomicOperation::ReplaceText { .. } => "replace_text",
            AtomicOperation::AddTextBox { .. } => "add_text_box",
            AtomicOperation::DeleteImage { .. } => "delete_image",
            AtomicOperation::ReplaceImage { .. } => "replace_image",
            AtomicOperation::AddImage { .. } => "add_image",
        }
    }

    pub fn image_source(&self) -> Option<&ImageSource> {
        match self {
            AtomicOperation::ReplaceImage { source, .. }
            | AtomicOperation::AddImage { source, .. } => Some(source),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideMapping {
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_index: Option<usize>,
    pub target_index: usize,
    #[serde(default)]
    pub instructions: Vec<AtomicOperation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionPlan {
    pub version: u32,
    pub mode: Mode,
    pub slides: Vec<SlideMapping>,
}

impl ExecutionPlan {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    /// Instructions across all mappings, tagged with their target index
    /// and position.
    pub fn instructions(&self) -> impl Iterator<Item = (usize, usize, &AtomicOperation)> {
        self.slides.iter().flat_map(|m| {
            m.instructions
                .iter()
                .enumerate()
                .map(move |(i, op)| (m.target_index, i, op))
        })
    }

    pub fn count_actions(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for m in &self.slides {
            match m.action {
                Action::Add => counts.0 += 1,
                Action::Modify => counts.1 += 1,
                Action::Keep => counts.2 += 1,
            }
        }
        counts
    }
}

/// One validation failure. `validate_plan` reports all of them instead of
/// stopping at the first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanError {
    UnsupportedVersion { found: u32 },
    EmptyPlan,
    TargetIndexNotContiguous { position: usize, found: usize },
    MissingSourceIndex { target_index: usize },
    SourceIndexOutOfRange { target_index: usize, source_index: usize },
    AddWithSourceIndex { target_index: usize },
    KeepWithInstructions { target_index: usize },
    NoInstructions { target_index: usize },
    UnknownElement { target_index: usize, element_id: String },
    AddReferencesExistingElement { target_index: usize, element_id: String },
    InvalidImageSource { target_index: usize, detail: String },
}

impl std::fmt::Display for PlanError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanError::UnsupportedVersion { found } => {
                write!(f, "unsupported plan version {found} (expected {PLAN_VERSION})")
            }
            PlanError::EmptyPlan => write!(f, "plan maps no slides"),
            PlanError::TargetIndexNotContiguous { position, found } => write!(
                f,
                "target_index at position {position} is {found}, expected {position}"
            ),
            PlanError::MissingSourceIndex { target_index } => {
                write!(f, "target {target_index}: KEEP/MODIFY needs a source_index")
            }
            PlanError::SourceIndexOutOfRange {
                target_index,
                source_index,
            } => write!(f, "target {target_index}: source_index {source_index} out of range"),
            PlanError::AddWithSourceIndex { target_index } => {
                write!(f, "target {target_index}: ADD must not carry a source_index")
            }
            PlanError::KeepWithInstructions { target_index } => {
                write!(f, "target {target_index}: KEEP carries instructions")
            }
            PlanError::NoInstructions { target_index } => {
                write!(f, "target {target_index}: ADD/MODIFY needs at least one instruction")
            }
            PlanError::UnknownElement {
                target_index,
                element_id,
            } => write!(f, "target {target_index}: element {element_id} not on the source slide"),
            PlanError::AddReferencesExistingElement {
                target_index,
                element_id,
            } => write!(
                f,
                "target {target_index}: ADD references pre-existing element {element_id}"
            ),
            PlanError::InvalidImageSource {
                target_index,
                detail,
            } => write!(f, "target {target_index}: invalid image source: {detail}"),
        }
    }
}

/// Check every plan invariant plus referential integrity against the deck.
/// Returns all violations; an empty list means the plan may be executed.
pub fn validate_plan(plan: &ExecutionPlan, deck: &DeckDocument) -> Vec<PlanError> {
    let mut errors = Vec::new();
    if plan.version != PLAN_VERSION {
        errors.push(PlanError::UnsupportedVersion { found: plan.version });
    }
    if plan.slides.is_empty() {
        errors.push(PlanError::EmptyPlan);
        return errors;
    }

    for (position, mapping) in plan.slides.iter().enumerate() {
        let t = mapping.target_index;
        if t != position {
            errors.push(PlanError::TargetIndexNotContiguous { position, found: t });
        }

        let source_slide = match (mapping.action, mapping.source_index) {
            (Action::Add, Some(_)) => {
                errors.push(PlanError::AddWithSourceIndex { target_index: t });
                None
            }
            (Action::Add, None) => None,
            (_, None) => {
                errors.push(PlanError::MissingSourceIndex { target_index: t });
                None
            }
            (_, Some(s)) => {
                if s >= deck.slide_count() {
                    errors.push(PlanError::SourceIndexOutOfRange {
                        target_index: t,
                        source_index: s,
                    });
                    None
                } else {
                    Some(deck.slide(s).expect("index checked"))
                }
            }
        };

        match mapping.action {
            Action::Keep => {
                if !mapping.instructions.is_empty() {
                    errors.push(PlanError::KeepWithInstructions { target_index: t });
                }
            }
            Action::Modify | Action::Add => {
                if mapping.instructions.is_empty() {
                    errors.push(PlanError::NoInstructions { target_index: t });
                }
            }
        }

        for op in &mapping.instructions {
            if let Some(id) = op.element_id() {
                match (mapping.action, source_slide) {
                    (Action::Add, _) => errors.push(PlanError::AddReferencesExistingElement {
                        target_index: t,
                        element_id: id.to_string(),
                    }),
                    (_, Some(slide)) if !slide.has_element(id) => {
                        errors.push(PlanError::UnknownElement {
                            target_index: t,
                            element_id: id.to_string(),
                        });
                    }
                    _ => {}
                }
            }
            if let Some(source) = op.image_source() {
                if !source.is_syntactically_valid() {
                    errors.push(PlanError::InvalidImageSource {
                        target_index: t,
                        detail: source.describe(),
                    });
                }
            }
            if let AtomicOperation::AddImage {
                placement: ImagePlacement::Scaled { scale, .. },
                ..
            } = op
            {
                if !scale.is_finite() || *scale <= 0.0 {
                    errors.push(PlanError::InvalidImageSource {
                        target_index: t,
                        detail: format!("scale {scale} must be finite and positive"),
                    });
                }
            }
        }
    }
    errors
}
