//! Rubric-based output judging: build the scoring request, parse the
//! structured reply, aggregate per-dimension means.

use std::collections::BTreeMap;

use deck_core::DeckSummary;
use gateways::ChatRequest;
use planning::AdaptationRequest;
use serde::{Deserialize, Serialize};

use crate::error::{EvalError, Result};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Criterion {
    #[serde(rename = "IA-1")]
    Ia1,
    #[serde(rename = "IA-2")]
    Ia2,
    #[serde(rename = "CC-1")]
    Cc1,
    #[serde(rename = "CC-2")]
    Cc2,
    #[serde(rename = "FA-1")]
    Fa1,
    #[serde(rename = "VC-1")]
    Vc1,
    #[serde(rename = "VC-2")]
    Vc2,
}

pub const ALL_CRITERIA: [Criterion; 7] = [
    Criterion::Ia1,
    Criterion::Ia2,
    Criterion::Cc1,
    Criterion::Cc2,
    Criterion::Fa1,
    Criterion::Vc1,
    Criterion::Vc2,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Dimension {
    IA,
    CC,
    FA,
    VC,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::Ia1 => "IA-1",
            Criterion::Ia2 => "IA-2",
            Criterion::Cc1 => "CC-1",
            Criterion::Cc2 => "CC-2",
            Criterion::Fa1 => "FA-1",
            Criterion::Vc1 => "VC-1",
            Criterion::Vc2 => "VC-2",
        }
    }

    pub fn dimension(&self) -> Dimension {
        match self {
            Criterion::Ia1 | Criterion::Ia2 => Dimension::IA,
            Criterion::Cc1 | Criterion::Cc2 => Dimension::CC,
            Criterion::Fa1 => Dimension::FA,
            Criterion::Vc1 | Criterion::Vc2 => Dimension::VC,
        }
    }
}

/// Scoring guide handed to the judge verbatim. Each criterion is scored
/// on the 1-5 scale (5 excellent, 4 very good, 3 adequate, 2 needs
/// improvement, 1 poor).
pub const DEFAULT_RUBRIC: &str = "\
Score each criterion from 1 to 5 (5 excellent, 4 very good, 3 adequate, \
2 needs improvement, 1 poor).
IA-1 (directive fulfillment): are all of the instructor's stated \
requirements carried out, with nothing missed or misread?
IA-2 (no superfluous content): did the system avoid adding material the \
instructor never asked for?
CC-1 (logical consistency): do the adapted slides present ideas in a \
rational, non-contradictory order?
CC-2 (narrative flow): is the progression across slides well structured \
and unambiguous?
FA-1 (factual correctness): is every new or changed statement accurate, \
current, and checkable?
VC-1 (legibility): are text and visuals clear and easy to follow?
VC-2 (stylistic consistency): does the adapted deck still look like the \
original deck?";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionScore {
    pub score: u8,
    pub rationale: String,
}

/// Seven per-criterion scores plus per-dimension means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RubricReport {
    pub criteria: BTreeMap<Criterion, CriterionScore>,
    pub dimensions: BTreeMap<Dimension, f64>,
}

impl RubricReport {
    /// Build from a complete criterion map, computing dimension means.
    pub fn from_criteria(criteria: BTreeMap<Criterion, CriterionScore>) -> Result<Self> {
        for c in ALL_CRITERIA {
            if !criteria.contains_key(&c) {
                return Err(EvalError::MissingCriterion(c.as_str().to_string()));
            }
        }
        let mut sums: BTreeMap<Dimension, (f64, usize)> = BTreeMap::new();
        for (c, s) in &criteria {
            let entry = sums.entry(c.dimension()).or_insert((0.0, 0));
            entry.0 += s.score as f64;
            entry.1 += 1;
        }
        let dimensions = sums
            .into_iter()
            .map(|(d, (sum, n))| (d, sum / n as f64))
            .collect();
        Ok(RubricReport {
            criteria,
            dimensions,
        })
    }

    pub fn dimension(&self, d: Dimension) -> f64 {
        self.dimensions[&d]
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// The scoring request: the four inputs in labeled sections, temperature
/// 0, and instructions to reply with one JSON object keyed by criterion.
/// Deterministic: the same inputs render byte-identically.
pub fn build_judge_request(
    original: &DeckSummary,
    request: &AdaptationRequest,
    adapted: &DeckSummary,
    rubrics: &str,
) -> ChatRequest {
    let body = format!(
        "You are scoring a slide adaptation.\n\n\
## Original slides\n{original}\n\n\
## Instructor request\n{request}\n\n\
## Adapted slides\n{adapted}\n\n\
## Rubrics\n{rubrics}\n\n\
Reply with a single JSON object and nothing else, of the shape\n\
{{\"IA-1\": {{\"score\": <1-5>, \"rationale\": \"...\"}}, ...}}\n\
covering exactly these criteria: IA-1, IA-2, CC-1, CC-2, FA-1, VC-1, VC-2.",
        original = render_summary_for_judge(original),
        request = request.text,
        adapted = render_summary_for_judge(adapted),
        rubrics = rubrics,
    );
    ChatRequest::new("judge").structured().user(body)
}

fn render_summary_for_judge(summary: &DeckSummary) -> String {
    let mut out = format!("{} slides.\n", summary.slide_count);
    for entry in &summary.entries {
        out.push_str(&format!(
            "[slide {} | {} images] {}\n",
            entry.index, entry.image_count, entry.full_text
        ));
    }
    out
}

/// Serialize a report back to the reply shape the judge produces;
/// `parse_judge_response(render(r)) == r`.
pub fn render_judge_reply(report: &RubricReport) -> String {
    let map: BTreeMap<&str, &CriterionScore> = report
        .criteria
        .iter()
        .map(|(c, s)| (c.as_str(), s))
        .collect();
    serde_json::to_string_pretty(&map).expect("criteria serialize")
}

/// Strict parse of the judge reply: all seven criteria present, every
/// score an integer in 1..=5.
pub fn parse_judge_response(text: &str) -> Result<RubricReport> {
    let trimmed = text.trim();
    let unfenced = trimmed
        .strip_prefix("```json")
        .or_else(|| trimmed.strip_prefix("```"))
        .map(|s| s.strip_suffix("```").unwrap_or(s))
        .unwrap_or(trimmed)
        .trim();
    let value: serde_json::Value =
        serde_json::from_str(unfenced).map_err(|e| EvalError::JudgeParse(e.to_string()))?;
    let object = value
        .as_object()
        .ok_or_else(|| EvalError::JudgeParse("reply is not a JSON object".to_string()))?;

    let mut criteria = BTreeMap::new();
    for criterion in ALL_CRITERIA {
        let name = criterion.as_str();
        let entry = object
            .get(name)
            .ok_or_else(|| EvalError::MissingCriterion(name.to_string()))?;
        let score = entry
            .get("score")
            .and_then(serde_json::Value::as_i64)
            .ok_or_else(|| EvalError::JudgeParse(format!("{name} has no integer score")))?;
        if !(1..=5).contains(&score) {
            return Err(EvalError::ScoreOutOfRange {
                criterion: name.to_string(),
                value: score,
            });
        }
        let rationale = entry
            .get("rationale")
            .and_then(serde_json::Value::as_str)
            .unwrap_or_default()
            .to_string();
        criteria.insert(
            criterion,
            CriterionScore {
                score: score as u8,
                rationale,
            },
        );
    }
    RubricReport::from_criteria(criteria)
}
