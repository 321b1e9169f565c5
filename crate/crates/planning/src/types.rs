//! Inputs and intermediate artifacts of the strategic-planning phase.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Recompose,
    Refine,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Recompose => "recompose",
            Mode::Refine => "refine",
        })
    }
}

/// The instructor's natural-language request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptationRequest {
    pub text: String,
    /// Skip classification and force a workflow.
    pub forced_mode: Option<Mode>,
}

impl AdaptationRequest {
    pub fn new(text: impl Into<String>) -> Self {
        AdaptationRequest {
            text: text.into(),
            forced_mode: None,
        }
    }

    pub fn forced(text: impl Into<String>, mode: Mode) -> Self {
        AdaptationRequest {
            text: text.into(),
            forced_mode: Some(mode),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialKind {
    Text,
    ImagePath,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaterialItem {
    pub name: String,
    pub kind: MaterialKind,
    pub content: String,
}

/// Reference materials supplied by the instructor. Names are unique.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaterialSet {
    pub items: Vec<MaterialItem>,
}

impl MaterialSet {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Outcome of need classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeedClass {
    pub mode: Mode,
    pub rationale: String,
}

/// The five-part pedagogical blueprint driving a Recompose run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionalDesign {
    pub course_info: String,
    pub student_analysis: String,
    pub instructional_flow: Vec<String>,
    pub learning_objectives: Vec<String>,
    pub difficult_points: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SlideRef {
    Index(usize),
    Global(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapFinding {
    pub slide: SlideRef,
    pub finding: String,
}

/// High-level modification list derived from the gap analysis between the
/// instructional design and the existing deck.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptiveGuideline {
    pub gap_findings: Vec<GapFinding>,
    pub core_modifications: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectiveStep {
    pub target: String,
    pub instruction: String,
}

/// Actionable steps for a Refine run. `queries` is the directive's opt-in
/// to retrieval; Refine performs no search otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Directive {
    pub steps: Vec<DirectiveStep>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub queries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub text: String,
    /// Source URL, or the material name for instructor-supplied content.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub label: String,
    pub snippets: Vec<Snippet>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub image_urls: Vec<String>,
}

/// Curated retrieval output: text snippets and image URLs per topic, plus
/// the instructor materials carried through by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InformationPacket {
    pub topics: Vec<Topic>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub material_refs: Vec<String>,
}
