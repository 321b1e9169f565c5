//! Apply / validate / re-apply cycle. Each iteration re-runs only the
//! instructions the last report flagged, so the loop is idempotent on
//! satisfied work and always terminates within `max_iters`.

use deck_core::DeckDocument;
use gateways::ImageFetcher;
use planning::ExecutionPlan;

use crate::apply::{
    apply_image_op, apply_plan_with_hook, apply_text_op, ApplyEntry, ApplyHook, ApplyLog,
    ApplyOutcome,
};
use crate::error::Result;
use crate::validate::{validate_outcome, SlideDigests, ValidationReport};

#[derive(Debug, Clone)]
pub struct RepairOutcome {
    pub deck: DeckDocument,
    pub iterations_used: usize,
    pub reports: Vec<ValidationReport>,
    pub converged: bool,
    pub log: ApplyLog,
}

/// Run the full execution cycle: apply, validate, and re-apply flagged
/// instructions until the report passes or `max_iters` is reached.
pub fn repair_loop(
    deck: &DeckDocument,
    plan: &ExecutionPlan,
    assets: &dyn ImageFetcher,
    max_iters: usize,
) -> Result<RepairOutcome> {
    repair_loop_with_hook(deck, plan, assets, max_iters, &mut |_, _| true)
}

/// `repair_loop` with a fault-injection hook applied to the first
/// iteration only; repair passes always execute for real.
pub fn repair_loop_with_hook(
    deck: &DeckDocument,
    plan: &ExecutionPlan,
    assets: &dyn ImageFetcher,
    max_iters: usize,
    hook: &mut ApplyHook<'_>,
) -> Result<RepairOutcome> {
    let max_iters = max_iters.max(1);
    let pre = SlideDigests::capture(deck);
    let (mut current, mut log) = apply_plan_with_hook(deck, plan, assets, hook)?;

    let mut reports = Vec::new();
    loop {
        let report = validate_outcome(&current, plan, &pre);
        let pass = report.pass;
        reports.push(report);
        if pass || reports.len() >= max_iters {
            let iterations_used = reports.len();
            return Ok(RepairOutcome {
                deck: current,
                iterations_used,
                reports,
                converged: pass,
                log,
            });
        }
        reapply_flagged(&mut current, plan, assets, reports.last().unwrap(), &mut log);
    }
}

fn reapply_flagged(
    deck: &mut DeckDocument,
    plan: &ExecutionPlan,
    assets: &dyn ImageFetcher,
    report: &ValidationReport,
    log: &mut ApplyLog,
) {
    for d in &report.discrepancies {
        let Some(instruction_index) = d.instruction_index else {
            // A KEEP digest mismatch has no instruction to re-run.
            continue;
        };
        let Some(mapping) = plan
            .slides
            .iter()
            .find(|m| m.target_index == d.target_index)
        else {
            continue;
        };
        let Some(op) = mapping.instructions.get(instruction_index) else {
            continue;
        };
        let result = match op {
            planning::AtomicOperation::DeleteText { .. }
            | planning::AtomicOperation::ReplaceText { .. }
            | planning::AtomicOperation::AddTextBox { .. } => {
                apply_text_op(deck, d.target_index, op)
            }
            _ => apply_image_op(deck, d.target_index, op, assets, &mut log.assets_fetched),
        };
        log.entries.push(match result {
            Ok(digest) => ApplyEntry {
                target_index: d.target_index,
                instruction_index,
                op: op.clone(),
                outcome: ApplyOutcome::Applied,
                payload_digest: digest,
            },
            Err(err) => ApplyEntry {
                target_index: d.target_index,
                instruction_index,
                op: op.clone(),
                outcome: ApplyOutcome::Failed {
                    reason: err.to_string(),
                },
                payload_digest: None,
            },
        });
    }
}
