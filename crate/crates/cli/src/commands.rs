//! Command implementations. Each returns the process exit code: 0 for a
//! converged run, 2 for a finished-but-unconverged run, 1 for hard
//! errors (mapped by the caller).

use std::path::{Path, PathBuf};

use anyhow::Context;
use deck_core::{deck_summary, load_deck, save_deck, DeckDocument};
use evalkit::{MatchMode, OpsReport, TaskScores};
use execution_qa::{repair_loop, RepairOutcome};
use planning::{
    run_planning, validate_plan, AdaptationRequest, ExecutionPlan, MaterialSet, Mode, PlanError,
    PlanningOptions, PlanningOutcome,
};
use serde::Serialize;

use crate::backends::{build_backends, Backends};
use crate::config::RunConfig;

pub struct AdaptInputs {
    pub deck_path: PathBuf,
    pub request_text: String,
    pub materials: MaterialSet,
    pub forced_mode: Option<Mode>,
    pub out: PathBuf,
    pub plan_out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

pub struct AdaptRun {
    pub planning: PlanningOutcome,
    pub repair: RepairOutcome,
    pub backends: Backends,
    pub artifacts: ArtifactPaths,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactPaths {
    pub deck: PathBuf,
    pub plan: PathBuf,
    pub report: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guideline: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directive: Option<PathBuf>,
}

fn derived(out: &Path, ext: &str) -> PathBuf {
    out.with_extension(ext)
}

pub fn load_deck_file(path: &Path) -> anyhow::Result<DeckDocument> {
    let bytes =
        std::fs::read(path).with_context(|| format!("cannot read deck {}", path.display()))?;
    load_deck(&bytes).with_context(|| format!("cannot load deck {}", path.display()))
}

pub fn read_plan_file(path: &Path) -> anyhow::Result<ExecutionPlan> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read plan {}", path.display()))?;
    ExecutionPlan::from_json(&raw)
        .with_context(|| format!("plan file {} is not valid plan JSON", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

/// The whole pipeline: classify, plan, execute, repair. Artifacts land
/// next to `--out` unless explicit paths are given.
pub fn run_adapt(cfg: &RunConfig, inputs: AdaptInputs) -> anyhow::Result<AdaptRun> {
    let deck = load_deck_file(&inputs.deck_path)?;
    let backends = build_backends(cfg)?;
    let request = AdaptationRequest {
        text: inputs.request_text.clone(),
        forced_mode: inputs.forced_mode,
    };
    let options = PlanningOptions {
        max_search_results: gateways::DEFAULT_MAX_RESULTS,
        search_parallelism: cfg.parallelism,
    };
    let planning = run_planning(
        backends.chat.as_ref(),
        backends.search.as_ref(),
        &deck,
        &request,
        &inputs.materials,
        &options,
    )?;
    let repair = repair_loop(
        &deck,
        &planning.plan,
        backends.images.as_ref(),
        cfg.max_validate_iters,
    )?;

    let artifacts = write_adapt_artifacts(&inputs, &planning, &repair)?;
    Ok(AdaptRun {
        planning,
        repair,
        backends,
        artifacts,
    })
}

fn write_adapt_artifacts(
    inputs: &AdaptInputs,
    planning: &PlanningOutcome,
    repair: &RepairOutcome,
) -> anyhow::Result<ArtifactPaths> {
    let deck_path = inputs.out.clone();
    write_file(&deck_path, &save_deck(&repair.deck)?)?;

    let plan_path = inputs
        .plan_out
        .clone()
        .unwrap_or_else(|| derived(&inputs.out, "plan.json"));
    write_file(&plan_path, planning.plan.to_json_pretty().as_bytes())?;

    let mut design = None;
    let mut guideline = None;
    let mut directive = None;
    if let Some(d) = &planning.design {
        let path = derived(&inputs.out, "design.txt");
        write_file(&path, render_design(d).as_bytes())?;
        design = Some(path);
    }
    if let Some(g) = &planning.guideline {
        let path = derived(&inputs.out, "guideline.txt");
        write_file(&path, render_guideline(g).as_bytes())?;
        guideline = Some(path);
    }
    if let Some(d) = &planning.directive {
        let path = derived(&inputs.out, "directive.txt");
        write_file(&path, render_directive(d).as_bytes())?;
        directive = Some(path);
    }

    let report_path = inputs
        .report
        .clone()
        .unwrap_or_else(|| derived(&inputs.out, "report.json"));
    write_file(&report_path, run_report_json(planning, repair).as_bytes())?;

    Ok(ArtifactPaths {
        deck: deck_path,
        plan: plan_path,
        report: report_path,
        design,
        guideline,
        directive,
    })
}

fn run_report_json(planning: &PlanningOutcome, repair: &RepairOutcome) -> String {
    let value = serde_json::json!({
        "need": planning.need,
        "queries": planning.queries,
        "packet": planning.packet,
        "converged": repair.converged,
        "iterations_used": repair.iterations_used,
        "apply_log": repair.log,
        "validation_reports": repair.reports,
    });
    serde_json::to_string_pretty(&value).expect("report serializes")
}

fn render_design(d: &planning::InstructionalDesign) -> String {
    let list = |items: &[String]| {
        items
            .iter()
            .map(|i| format!("- {i}"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    format!(
        "COURSE_INFO:\n{}\n\nSTUDENT_ANALYSIS:\n{}\n\nINSTRUCTIONAL_FLOW:\n{}\n\n\
LEARNING_OBJECTIVES:\n{}\n\nDIFFICULT_POINTS:\n{}\n",
        d.course_info,
        d.student_analysis,
        list(&d.instructional_flow),
        list(&d.learning_objectives),
        list(&d.difficult_points)
    )
}

fn render_guideline(g: &planning::AdaptiveGuideline) -> String {
    let mut out = String::from("GAP FINDINGS:\n");
    for f in &g.gap_findings {
        match &f.slide {
            planning::SlideRef::Index(i) => out.push_str(&format!("- slide {i}: {}\n", f.finding)),
            planning::SlideRef::Global(_) => out.push_str(&format!("- global: {}\n", f.finding)),
        }
    }
    out.push_str("\nCORE MODIFICATIONS:\n");
    for m in &g.core_modifications {
        out.push_str(&format!("- {m}\n"));
    }
    out
}

fn render_directive(d: &planning::Directive) -> String {
    let mut out = String::from("DIRECTIVE:\n");
    for (i, step) in d.steps.iter().enumerate() {
        out.push_str(&format!("{}. [{}] {}\n", i + 1, step.target, step.instruction));
    }
    if !d.queries.is_empty() {
        out.push_str(&format!("\nQUERIES: {}\n", d.queries.join("; ")));
    }
    out
}

/// Human review rendering of a plan: one row per mapping plus totals.
pub fn render_manifest(plan: &ExecutionPlan) -> String {
    let mut out = format!(
        "{:<8} {:<8} {:<8} {:<4}\n",
        "target", "action", "source", "ops"
    );
    for m in &plan.slides {
        out.push_str(&format!(
            "{:<8} {:<8} {:<8} {:<4}\n",
            m.target_index,
            m.action.to_string(),
            m.source_index
                .map(|s| s.to_string())
                .unwrap_or_else(|| "-".to_string()),
            m.instructions.len()
        ));
    }
    let (add, modify, keep) = plan.count_actions();
    out.push_str(&format!("totals: ADD {add}, MODIFY {modify}, KEEP {keep}\n"));
    out
}

pub fn render_plan_errors(errors: &[PlanError]) -> String {
    let mut out = format!("{:<8} {}\n", "kind", "problem");
    for e in errors {
        let kind = serde_json::to_value(e)
            .ok()
            .and_then(|v| v.get("kind").and_then(|k| k.as_str().map(str::to_string)))
            .unwrap_or_else(|| "error".to_string());
        out.push_str(&format!("{kind:<8} {e}\n"));
    }
    out
}

/// Phase 1 only: write the plan (and its planning artifacts) for review.
pub fn run_plan_only(cfg: &RunConfig, inputs: AdaptInputs) -> anyhow::Result<(AdaptRun, bool)> {
    let deck = load_deck_file(&inputs.deck_path)?;
    let backends = build_backends(cfg)?;
    let request = AdaptationRequest {
        text: inputs.request_text.clone(),
        forced_mode: inputs.forced_mode,
    };
    let options = PlanningOptions {
        max_search_results: gateways::DEFAULT_MAX_RESULTS,
        search_parallelism: cfg.parallelism,
    };
    let planning = run_planning(
        backends.chat.as_ref(),
        backends.search.as_ref(),
        &deck,
        &request,
        &inputs.materials,
        &options,
    )?;

    let plan_path = inputs
        .plan_out
        .clone()
        .unwrap_or_else(|| PathBuf::from("plan.json"));
    write_file(&plan_path, planning.plan.to_json_pretty().as_bytes())?;
    let mut design = None;
    let mut guideline = None;
    let mut directive = None;
    if let Some(d) = &planning.design {
        let path = plan_path.with_extension("design.txt");
        write_file(&path, render_design(d).as_bytes())?;
        design = Some(path);
    }
    if let Some(g) = &planning.guideline {
        let path = plan_path.with_extension("guideline.txt");
        write_file(&path, render_guideline(g).as_bytes())?;
        guideline = Some(path);
    }
    if let Some(d) = &planning.directive {
        let path = plan_path.with_extension("directive.txt");
        write_file(&path, render_directive(d).as_bytes())?;
        directive = Some(path);
    }

    let converged = true;
    Ok((
        AdaptRun {
            repair: RepairOutcome {
                deck,
                iterations_used: 0,
                reports: vec![],
                converged,
                log: Default::default(),
            },
            artifacts: ArtifactPaths {
                deck: PathBuf::new(),
                plan: plan_path,
                report: PathBuf::new(),
                design,
                guideline,
                directive,
            },
            planning,
            backends,
        },
        converged,
    ))
}

pub struct ApplyInputs {
    pub deck_path: PathBuf,
    pub plan_in: PathBuf,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
}

/// Phase 2 only: execute a reviewed plan file.
pub fn run_apply(cfg: &RunConfig, inputs: ApplyInputs) -> anyhow::Result<(u8, Option<RepairOutcome>)> {
    let deck = load_deck_file(&inputs.deck_path)?;
    let plan = read_plan_file(&inputs.plan_in)?;
    let errors = validate_plan(&plan, &deck);
    if !errors.is_empty() {
        eprint!("{}", render_plan_errors(&errors));
        return Ok((1, None));
    }
    let backends = build_backends(cfg)?;
    let repair = repair_loop(&deck, &plan, backends.images.as_ref(), cfg.max_validate_iters)?;

    write_file(&inputs.out, &save_deck(&repair.deck)?)?;
    let report_path = inputs
        .report
        .clone()
        .unwrap_or_else(|| derived(&inputs.out, "report.json"));
    let report = serde_json::json!({
        "converged": repair.converged,
        "iterations_used": repair.iterations_used,
        "apply_log": repair.log,
        "validation_reports": repair.reports,
    });
    write_file(
        &report_path,
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?;

    let code = if repair.converged { 0 } else { 2 };
    Ok((code, Some(repair)))
}

/// Compare a system plan or apply log against a reference operation set.
pub fn run_eval_ops(
    system_path: &Path,
    reference_path: &Path,
    strict: bool,
    report_out: Option<&Path>,
) -> anyhow::Result<(OpsReport, String)> {
    let system_raw = std::fs::read_to_string(system_path)
        .with_context(|| format!("cannot read {}", system_path.display()))?;
    let mut value: serde_json::Value = serde_json::from_str(&system_raw)
        .with_context(|| format!("{} is not JSON", system_path.display()))?;
    // A whole run report is accepted too; its nested apply log is the
    // system's executed operation record.
    if let Some(log) = value.get_mut("apply_log") {
        value = log.take();
    }
    let system_ops = if value.get("entries").is_some() {
        let log: execution_qa::ApplyLog = serde_json::from_value(value)
            .with_context(|| format!("{} is not a valid apply log", system_path.display()))?;
        evalkit::canonicalize_ops(evalkit::OpsSource::Log(&log))
    } else if value.get("slides").is_some() {
        let plan: ExecutionPlan = serde_json::from_value(value)
            .with_context(|| format!("{} is not a valid plan", system_path.display()))?;
        evalkit::canonicalize_ops(evalkit::OpsSource::Plan(&plan))
    } else {
        anyhow::bail!(
            "{} is neither a plan (slides), an apply log (entries), nor a run report (apply_log)",
            system_path.display()
        );
    };

    let reference_raw = std::fs::read_to_string(reference_path)
        .with_context(|| format!("cannot read {}", reference_path.display()))?;
    let reference_ops: Vec<evalkit::CanonicalOp> = serde_json::from_str(&reference_raw)
        .with_context(|| format!("reference file {}", reference_path.display()))?;

    let mode = if strict {
        MatchMode::Strict
    } else {
        MatchMode::Lenient
    };
    let result = evalkit::match_op_sets(&system_ops, &reference_ops, mode);
    let scores = evalkit::prf1(result.tp, result.fp, result.fn_)?;
    let label = system_path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "system".to_string());
    let report = OpsReport::new(vec![TaskScores {
        label,
        tp: result.tp,
        fp: result.fp,
        fn_: result.fn_,
        scores,
    }])?;

    if let Some(path) = report_out {
        write_file(path, report.to_json_pretty().as_bytes())?;
    }
    let table = report.render_table();
    Ok((report, table))
}

pub struct RubricInputs {
    pub original: PathBuf,
    pub adapted: PathBuf,
    pub request_text: String,
    pub report: Option<PathBuf>,
}

/// Build the judge request, run it against the backend, parse the scores.
pub fn run_eval_rubric(
    cfg: &RunConfig,
    inputs: RubricInputs,
) -> anyhow::Result<evalkit::RubricReport> {
    let original = deck_summary(&load_deck_file(&inputs.original)?);
    let adapted = deck_summary(&load_deck_file(&inputs.adapted)?);
    let backends = build_backends(cfg)?;
    let request = AdaptationRequest::new(inputs.request_text.clone());
    let chat_request =
        evalkit::build_judge_request(&original, &request, &adapted, evalkit::DEFAULT_RUBRIC);
    let response = backends.chat.complete(&chat_request)?;
    let report = evalkit::parse_judge_response(&response.text)?;
    if let Some(path) = &inputs.report {
        write_file(path, report.to_json_pretty().as_bytes())?;
    }
    Ok(report)
}
