//! Plan execution and quality assurance: the atomic-operation interpreter,
//! the structural validator, and the bounded repair loop that re-runs
//! flagged instructions until the outcome checks out.

mod apply;
pub mod digest;
mod error;
mod repair;
pub mod testgen;
mod validate;

pub use apply::{
    apply_image_op, apply_plan, apply_plan_with_hook, apply_text_op, placement_bounds, ApplyEntry,
    ApplyHook, ApplyLog, ApplyOutcome, AssetRecord,
};
pub use error::{ExecutionError, Result};
pub use repair::{repair_loop, repair_loop_with_hook, RepairOutcome};
pub use validate::{
    validate_outcome, Discrepancy, SlideDigests, ValidationReport, BOX_TOLERANCE_EMU,
};
