//! Prompt rendering. All renderers are deterministic; slide text is
//! capped per slide so a large deck cannot blow the context budget.

use deck_core::{DeckDocument, DeckSummary};

use crate::types::{AdaptiveGuideline, Directive, InformationPacket, MaterialSet, SlideRef};

/// Per-slide character budget inside prompts. The summary itself is never
/// truncated; only its prompt rendering is.
pub const SLIDE_TEXT_CAP: usize = 2000;
const TRUNCATION_MARK: &str = "…[truncated]";

pub(crate) fn capped(text: &str) -> String {
    if text.chars().count() <= SLIDE_TEXT_CAP {
        return text.to_string();
    }
    let head: String = text.chars().take(SLIDE_TEXT_CAP).collect();
    format!("{head}{TRUNCATION_MARK}")
}

pub(crate) fn render_summary(summary: &DeckSummary) -> String {
    let mut out = format!("The deck has {} slides.\n", summary.slide_count);
    for entry in &summary.entries {
        out.push_str(&format!(
            "\n== Slide {} (title guess: {:?}, {} images) ==\n{}\n",
            entry.index,
            entry.title_guess,
            entry.image_count,
            capped(&entry.full_text)
        ));
        for (i, desc) in entry.image_descriptions.iter().enumerate() {
            out.push_str(&format!("image {i}: {desc}\n"));
        }
    }
    out
}

pub(crate) fn render_materials(materials: &MaterialSet) -> String {
    if materials.is_empty() {
        return "No instructor materials were provided.\n".to_string();
    }
    let mut out = String::from("Instructor materials:\n");
    for item in &materials.items {
        match item.kind {
            crate::types::MaterialKind::Text => {
                out.push_str(&format!("- {} (text): {}\n", item.name, capped(&item.content)));
            }
            crate::types::MaterialKind::ImagePath => {
                out.push_str(&format!("- {} (image at {})\n", item.name, item.content));
            }
        }
    }
    out
}

pub(crate) fn render_guideline(guideline: &AdaptiveGuideline) -> String {
    let mut out = String::from("Gap findings:\n");
    for f in &guideline.gap_findings {
        match &f.slide {
            SlideRef::Index(i) => out.push_str(&format!("- slide {}: {}\n", i, f.finding)),
            SlideRef::Global(_) => out.push_str(&format!("- global: {}\n", f.finding)),
        }
    }
    out.push_str("Core modifications:\n");
    for m in &guideline.core_modifications {
        out.push_str(&format!("- {m}\n"));
    }
    out
}

pub(crate) fn render_directive(directive: &Directive) -> String {
    let mut out = String::from("Directive steps:\n");
    for (i, step) in directive.steps.iter().enumerate() {
        out.push_str(&format!("{}. [{}] {}\n", i + 1, step.target, step.instruction));
    }
    out
}

pub(crate) fn render_packet(packet: &InformationPacket) -> String {
    if packet.topics.is_empty() && packet.material_refs.is_empty() {
        return "No retrieved resources.\n".to_string();
    }
    let mut out = String::from("Retrieved resources:\n");
    for topic in &packet.topics {
        out.push_str(&format!("# {}\n", topic.label));
        for s in &topic.snippets {
            out.push_str(&format!("- {} (source: {})\n", s.text, s.source));
        }
        for url in &topic.image_urls {
            out.push_str(&format!("- image available: {url}\n"));
        }
    }
    if !packet.material_refs.is_empty() {
        out.push_str(&format!("Instructor materials: {}\n", packet.material_refs.join(", ")));
    }
    out
}

/// Element inventory with stable ids, the ground truth the plan must
/// reference.
pub(crate) fn render_inventory(deck: &DeckDocument) -> String {
    let mut out = String::from("Editable elements per source slide:\n");
    for slide in deck.slides() {
        out.push_str(&format!("slide {}:\n", slide.index()));
        for t in slide.texts() {
            out.push_str(&format!(
                "  {} text at ({}, {}) size {}x{}: {}\n",
                t.id, t.bounds.x, t.bounds.y, t.bounds.w, t.bounds.h,
                capped(&t.text())
            ));
        }
        for i in slide.images() {
            out.push_str(&format!(
                "  {} image ({}) at ({}, {}) size {}x{}\n",
                i.id, i.content_type, i.bounds.x, i.bounds.y, i.bounds.w, i.bounds.h
            ));
        }
    }
    out
}

pub(crate) const PLAN_SCHEMA_GUIDE: &str = r#"Reply with a single JSON object and nothing else, following this schema:
{
  "version": 1,
  "mode": "recompose" | "refine",
  "slides": [
    {
      "action": "keep" | "modify" | "add",
      "source_index": <0-based source slide, omit for add>,
      "target_index": <0-based position in the output deck>,
      "instructions": [
        {"op": "delete_text", "element_id": "s0-t0"},
        {"op": "replace_text", "element_id": "s0-t0", "new_text": "..."},
        {"op": "add_text_box", "text": "...", "box": {"x":0,"y":0,"w":914400,"h":914400},
         "font": {"size_pt": 24.0, "bold": true}},
        {"op": "delete_image", "element_id": "s0-i0"},
        {"op": "replace_image", "element_id": "s0-i0", "source": {"type":"url","value":"https://..."}},
        {"op": "add_image", "source": {"type":"url"|"path"|"base64","value":"..."},
         "placement": {"x":0,"y":0,"w":914400,"h":914400} or {"x":0,"y":0,"scale":1.0}}
      ]
    }
  ]
}
Rules: target_index values must be 0..M-1 in order; keep carries no
instructions; modify and add carry at least one; add has no source_index;
element ids must come from the inventory; geometry is in EMU
(914400 per inch). A source slide mapped to no target is dropped."#;
