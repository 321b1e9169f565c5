//! The planning agents. Each one renders a prompt, makes a single tagged
//! backend call, and parses the reply into a typed artifact. Replies that
//! do not parse are errors, never silently patched.

use deck_core::{DeckDocument, DeckSummary};
use gateways::{ChatBackend, ChatRequest};

use crate::error::{PlanningError, Result};
use crate::plan::{validate_plan, ExecutionPlan};
use crate::prompts;
use crate::types::{
    AdaptationRequest, AdaptiveGuideline, Directive, InstructionalDesign, InformationPacket,
    MaterialSet, Mode, NeedClass, SlideRef,
};

/// Decide between the two workflows. A forced mode short-circuits without
/// a backend call; otherwise the reply is scanned case-insensitively for
/// the two mode tokens and the first occurrence wins.
pub fn classify_need(
    backend: &dyn ChatBackend,
    request: &AdaptationRequest,
    summary: &DeckSummary,
) -> Result<NeedClass> {
    if let Some(mode) = request.forced_mode {
        return Ok(NeedClass {
            mode,
            rationale: "forced".to_string(),
        });
    }
    let req = ChatRequest::new("classify")
        .system(
            "You triage slide adaptation requests. Answer with 'recompose' for a \
comprehensive structural overhaul of the deck, or 'refine' for a targeted, \
content-focused modification, followed by one sentence of reasoning.",
        )
        .user(format!(
            "Request: {}\n\n{}",
            request.text,
            prompts::render_summary(summary)
        ));
    let resp = backend.complete(&req)?;
    let lower = resp.text.to_lowercase();
    let recompose_at = lower.find("recompose");
    let refine_at = lower.find("refine");
    let mode = match (recompose_at, refine_at) {
        (Some(a), Some(b)) => {
            if a < b {
                Mode::Recompose
            } else {
                Mode::Refine
            }
        }
        (Some(_), None) => Mode::Recompose,
        (None, Some(_)) => Mode::Refine,
        (None, None) => return Err(PlanningError::UnparseableClassification(resp.text)),
    };
    Ok(NeedClass {
        mode,
        rationale: resp.text.trim().to_string(),
    })
}

const DESIGN_SECTIONS: [&str; 5] = [
    "COURSE_INFO",
    "STUDENT_ANALYSIS",
    "INSTRUCTIONAL_FLOW",
    "LEARNING_OBJECTIVES",
    "DIFFICULT_POINTS",
];

/// Recompose step 1: the five-part pedagogical blueprint.
pub fn build_instructional_design(
    backend: &dyn ChatBackend,
    request: &AdaptationRequest,
    summary: &DeckSummary,
    materials: &MaterialSet,
) -> Result<InstructionalDesign> {
    let req = ChatRequest::new("design")
        .system(format!(
            "You are a lesson planner. Produce an instructional design with exactly \
these labeled sections, each non-empty:\n{}\nUse '- ' bullets inside \
INSTRUCTIONAL_FLOW, LEARNING_OBJECTIVES and DIFFICULT_POINTS.",
            DESIGN_SECTIONS.join(":\n") + ":"
        ))
        .user(format!(
            "Request: {}\n\n{}\n{}",
            request.text,
            prompts::render_summary(summary),
            prompts::render_materials(materials)
        ));
    let resp = backend.complete(&req)?;
    parse_design(&resp.text)
}

fn parse_design(text: &str) -> Result<InstructionalDesign> {
    let mut sections: std::collections::HashMap<&str, Vec<String>> =
        std::collections::HashMap::new();
    let mut current: Option<&str> = None;
    for line in text.lines() {
        let trimmed = line.trim();
        if let Some(name) = DESIGN_SECTIONS
            .iter()
            .find(|s| trimmed.starts_with(&format!("{s}:")) || trimmed == **s)
        {
            current = Some(name);
            let rest = trimmed[name.len()..].trim_start_matches(':').trim();
            sections.entry(name).or_default();
            if !rest.is_empty() {
                sections.get_mut(name).unwrap().push(rest.to_string());
            }
            continue;
        }
        if let Some(section) = current {
            if !trimmed.is_empty() {
                sections
                    .entry(section)
                    .or_default()
                    .push(trimmed.trim_start_matches("- ").trim().to_string());
            }
        }
    }

    let take_text = |name: &'static str| -> Result<String> {
        let lines = sections
            .get(name.to_uppercase().as_str())
            .filter(|v| !v.is_empty())
            .ok_or(PlanningError::MissingDesignField(name))?;
        Ok(lines.join("\n"))
    };
    let take_list = |name: &'static str| -> Result<Vec<String>> {
        let lines = sections
            .get(name.to_uppercase().as_str())
            .filter(|v| !v.is_empty())
            .ok_or(PlanningError::MissingDesignField(name))?;
        Ok(lines.clone())
    };

    Ok(InstructionalDesign {
        course_info: take_text("course_info")?,
        student_analysis: take_text("student_analysis")?,
        instructional_flow: take_list("instructional_flow")?,
        learning_objectives: take_list("learning_objectives")?,
        difficult_points: take_list("difficult_points")?,
    })
}

/// Recompose step 2: gap analysis between the design and the deck.
pub fn derive_adaptive_guideline(
    backend: &dyn ChatBackend,
    design: &InstructionalDesign,
    summary: &DeckSummary,
) -> Result<AdaptiveGuideline> {
    let req = ChatRequest::new("guideline")
        .structured()
        .system(
            "Compare the instructional design with the existing deck and reply with \
JSON only: {\"gap_findings\": [{\"slide\": <index or \"global\">, \
\"finding\": \"...\"}], \"core_modifications\": [\"...\"]}. \
core_modifications must contain at least one entry.",
        )
        .user(format!(
            "Instructional design:\n{}\n\n{}",
            serde_json::to_string_pretty(design).expect("design serializes"),
            prompts::render_summary(summary)
        ));
    let resp = backend.complete(&req)?;
    let guideline: AdaptiveGuideline =
        serde_json::from_str(extract_json(&resp.text)).map_err(|e| {
            PlanningError::ResponseParse {
                stage: "guideline",
                detail: e.to_string(),
            }
        })?;
    for finding in &guideline.gap_findings {
        if let SlideRef::Index(i) = finding.slide {
            if i >= summary.slide_count {
                return Err(PlanningError::DanglingSlideRef(i));
            }
        }
    }
    if guideline.core_modifications.is_empty() {
        return Err(PlanningError::EmptyGuideline);
    }
    Ok(guideline)
}

/// Refine path: translate the request into ordered actionable steps.
pub fn refine_directive(
    backend: &dyn ChatBackend,
    request: &AdaptationRequest,
    summary: &DeckSummary,
) -> Result<Directive> {
    let req = ChatRequest::new("directive")
        .structured()
        .system(
            "Turn the instructor's request into a precise directive. Reply with JSON \
only: {\"steps\": [{\"target\": \"what to change\", \"instruction\": \
\"how\"}], \"queries\": [\"web search query\", ...]}. Include \"queries\" \
only when fresh external information is genuinely required.",
        )
        .user(format!(
            "Request: {}\n\n{}",
            request.text,
            prompts::render_summary(summary)
        ));
    let resp = backend.complete(&req)?;
    let directive: Directive =
        serde_json::from_str(extract_json(&resp.text)).map_err(|e| {
            PlanningError::ResponseParse {
                stage: "directive",
                detail: e.to_string(),
            }
        })?;
    if directive.steps.is_empty() {
        return Err(PlanningError::EmptyDirective);
    }
    Ok(directive)
}

/// What the plan compiler works from.
#[derive(Debug, Clone, Copy)]
pub enum PlanBasis<'a> {
    Guideline(&'a AdaptiveGuideline),
    Directive(&'a Directive),
}

impl PlanBasis<'_> {
    fn render(&self) -> String {
        match self {
            PlanBasis::Guideline(g) => prompts::render_guideline(g),
            PlanBasis::Directive(d) => prompts::render_directive(d),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            PlanBasis::Guideline(_) => Mode::Recompose,
            PlanBasis::Directive(_) => Mode::Refine,
        }
    }
}

pub const QUERY_MAX_CHARS: usize = 200;

/// Contextual search queries for resource augmentation. May legitimately
/// be empty (a pure layout tweak needs no retrieval).
pub fn formulate_queries(
    backend: &dyn ChatBackend,
    basis: PlanBasis<'_>,
    summary: &DeckSummary,
) -> Result<Vec<String>> {
    let req = ChatRequest::new("queries")
        .structured()
        .system(
            "List the web searches needed to ground the planned changes in current \
information. Reply with a JSON array of query strings only; reply [] when \
no retrieval is needed.",
        )
        .user(format!("{}\n{}", basis.render(), prompts::render_summary(summary)));
    let resp = backend.complete(&req)?;
    let raw: Vec<String> =
        serde_json::from_str(extract_json(&resp.text)).map_err(|e| {
            PlanningError::ResponseParse {
                stage: "queries",
                detail: e.to_string(),
            }
        })?;
    Ok(dedup_queries(raw))
}

pub(crate) fn dedup_queries(raw: Vec<String>) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    raw.into_iter()
        .map(|q| {
            let trimmed = q.trim().to_string();
            if trimmed.chars().count() > QUERY_MAX_CHARS {
                trimmed.chars().take(QUERY_MAX_CHARS).collect()
            } else {
                trimmed
            }
        })
        .filter(|q| !q.is_empty() && seen.insert(q.clone()))
        .collect()
}

/// Compile the structural mapping plus per-slide instructions, then gate
/// it through `validate_plan`. Nothing invalid leaves this function.
pub fn build_execution_plan(
    backend: &dyn ChatBackend,
    basis: PlanBasis<'_>,
    deck: &DeckDocument,
    packet: &InformationPacket,
) -> Result<ExecutionPlan> {
    let req = ChatRequest::new("plan")
        .structured()
        .system(format!(
            "You are the adaptation organizer. Map every source slide to ADD, MODIFY \
or KEEP and write the atomic instructions for each target slide.\n\n{}",
            prompts::PLAN_SCHEMA_GUIDE
        ))
        .user(format!(
            "Mode: {}\n\n{}\n{}\n{}",
            basis.mode(),
            basis.render(),
            prompts::render_inventory(deck),
            prompts::render_packet(packet)
        ));
    let resp = backend.complete(&req)?;
    let plan = ExecutionPlan::from_json(extract_json(&resp.text))
        .map_err(|e| PlanningError::PlanParseError(e.to_string()))?;
    let errors = validate_plan(&plan, deck);
    if !errors.is_empty() {
        return Err(PlanningError::PlanInvalid(errors));
    }
    Ok(plan)
}

/// Strip optional markdown fences around a JSON reply.
pub(crate) fn extract_json(text: &str) -> &str {
    let trimmed = text.trim();
    let without_open = trimmed
        .strip_prefix("```json")
        .or_else(|| trimmed.strip_prefix("```"))
        .unwrap_or(trimmed);
    without_open.strip_suffix("```").unwrap_or(without_open).trim()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extract_json_unwraps_fences() {
        assert_eq!(extract_json("```json\n{\"a\":1}\n```"), "{\"a\":1}");
        assert_eq!(extract_json("{\"a\":1}"), "{\"a\":1}");
    }

    #[test]
    fn dedup_queries_trims_truncates_and_dedups() {
        let long = "q".repeat(300);
        let out = dedup_queries(vec![
            " ev market ".into(),
            "ev market".into(),
            long.clone(),
            String::new(),
        ]);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0], "ev market");
        assert_eq!(out[1].chars().count(), QUERY_MAX_CHARS);
    }

    #[test]
    fn design_parser_reports_missing_sections() {
        let reply = "COURSE_INFO: Bio 101\nSTUDENT_ANALYSIS: general audience\n\
INSTRUCTIONAL_FLOW:\n- hook\nLEARNING_OBJECTIVES:\n- explain CRISPR";
        match parse_design(reply) {
            Err(PlanningError::MissingDesignField(field)) => {
                assert_eq!(field, "difficult_points");
            }
            other => panic!("expected MissingDesignField, got {other:?}"),
        }
    }
}
