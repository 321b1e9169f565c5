//! Strategic planning: translate an instructor's request into a validated
//! execution plan through need classification, instructional design or a
//! refine directive, resource augmentation, and plan compilation.

mod agents;
mod error;
mod packet;
mod pipeline;
mod plan;
mod prompts;
mod types;

pub use agents::{
    build_execution_plan, build_instructional_design, classify_need, derive_adaptive_guideline,
    formulate_queries, refine_directive, PlanBasis, QUERY_MAX_CHARS,
};
pub use error::{PlanningError, Result};
pub use packet::{assemble_packet, SNIPPET_MAX_CHARS};
pub use pipeline::{run_planning, PlanningOptions, PlanningOutcome};
pub use plan::{
    validate_plan, Action, AtomicOperation, ExecutionPlan, ImagePlacement, PlanError,
    SlideMapping, PLAN_VERSION,
};
pub use prompts::SLIDE_TEXT_CAP;
pub use types::{
    AdaptationRequest, AdaptiveGuideline, Directive, DirectiveStep, GapFinding,
    InstructionalDesign, InformationPacket, MaterialItem, MaterialKind, MaterialSet, Mode,
    NeedClass, SlideRef, Snippet, Topic,
};
