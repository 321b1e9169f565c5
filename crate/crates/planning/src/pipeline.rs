//! Phase-1 orchestration: classify, design or direct, augment, compile.
//!
//! The stages are strictly sequential; only the search fan-out inside
//! resource augmentation runs concurrently. A Recompose run invokes the
//! design and guideline agents and never the directive agent; a Refine
//! run does the reverse.

use deck_core::{deck_summary, DeckDocument};
use gateways::{search_many, ChatBackend, SearchProvider};

use crate::agents::{
    build_execution_plan, build_instructional_design, classify_need, derive_adaptive_guideline,
    formulate_queries, refine_directive, PlanBasis,
};
use crate::error::Result;
use crate::packet::assemble_packet;
use crate::plan::ExecutionPlan;
use crate::types::{
    AdaptationRequest, AdaptiveGuideline, Directive, InstructionalDesign, InformationPacket,
    MaterialSet, Mode, NeedClass,
};

#[derive(Debug, Clone, Copy)]
pub struct PlanningOptions {
    pub max_search_results: usize,
    pub search_parallelism: usize,
}

impl Default for PlanningOptions {
    fn default() -> Self {
        PlanningOptions {
            max_search_results: gateways::DEFAULT_MAX_RESULTS,
            search_parallelism: 4,
        }
    }
}

/// Everything phase 1 produced, kept for artifact output and evaluation.
#[derive(Debug, Clone)]
pub struct PlanningOutcome {
    pub need: NeedClass,
    pub design: Option<InstructionalDesign>,
    pub guideline: Option<AdaptiveGuideline>,
    pub directive: Option<Directive>,
    pub queries: Vec<String>,
    pub packet: InformationPacket,
    pub plan: ExecutionPlan,
}

pub fn run_planning(
    chat: &dyn ChatBackend,
    search: &dyn SearchProvider,
    deck: &DeckDocument,
    request: &AdaptationRequest,
    materials: &MaterialSet,
    options: &PlanningOptions,
) -> Result<PlanningOutcome> {
    let summary = deck_summary(deck);
    let need = classify_need(chat, request, &summary)?;

    match need.mode {
        Mode::Recompose => {
            let design = build_instructional_design(chat, request, &summary, materials)?;
            let guideline = derive_adaptive_guideline(chat, &design, &summary)?;
            let queries = formulate_queries(chat, PlanBasis::Guideline(&guideline), &summary)?;
            let packet = augment(search, &queries, materials, options)?;
            let plan = build_execution_plan(chat, PlanBasis::Guideline(&guideline), deck, &packet)?;
            Ok(PlanningOutcome {
                need,
                design: Some(design),
                guideline: Some(guideline),
                directive: None,
                queries,
                packet,
                plan,
            })
        }
        Mode::Refine => {
            let directive = refine_directive(chat, request, &summary)?;
            // Refine skips retrieval unless the directive itself asked
            // for queries.
            let queries = crate::agents::dedup_queries(directive.queries.clone());
            let packet = augment(search, &queries, materials, options)?;
            let plan = build_execution_plan(chat, PlanBasis::Directive(&directive), deck, &packet)?;
            Ok(PlanningOutcome {
                need,
                design: None,
                guideline: None,
                directive: Some(directive),
                queries,
                packet,
                plan,
            })
        }
    }
}

fn augment(
    search: &dyn SearchProvider,
    queries: &[String],
    materials: &MaterialSet,
    options: &PlanningOptions,
) -> Result<InformationPacket> {
    let mut results = Vec::with_capacity(queries.len());
    for (query, outcome) in search_many(
        search,
        queries,
        options.max_search_results,
        options.search_parallelism,
    ) {
        results.push((query, outcome?));
    }
    Ok(assemble_packet(&results, materials))
}
