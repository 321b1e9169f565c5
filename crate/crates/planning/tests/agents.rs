//! Agent behaviour against scripted transcripts.

use deck_core::{deck_summary, load_deck, tiny_png, BoundingBox, DeckBuilder, SlideSpec};
use gateways::{CallLog, FixtureStore, SearchResult};
use planning::{
    assemble_packet, build_execution_plan, build_instructional_design, classify_need,
    derive_adaptive_guideline, formulate_queries, refine_directive, run_planning, validate_plan,
    AdaptationRequest, Action, AtomicOperation, ExecutionPlan, InformationPacket, MaterialSet,
    Mode, PlanBasis, PlanError, PlanningError, PlanningOptions, SlideRef,
};

fn sample_deck() -> deck_core::DeckDocument {
    let bytes = DeckBuilder::new()
        .slide(SlideSpec::new().text("Course intro"))
        .slide(SlideSpec::new().text("Case study 2019").text("Details"))
        .slide(
            SlideSpec::new()
                .text("Wrap up")
                .image(tiny_png(), BoundingBox::new(0, 0, 914_400, 914_400)),
        )
        .build()
        .unwrap();
    load_deck(&bytes).unwrap()
}

fn scripted(entries: serde_json::Value) -> (tempfile::TempDir, FixtureStore) {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("transcripts.json"), entries.to_string()).unwrap();
    let store = FixtureStore::load(dir.path()).unwrap();
    (dir, store)
}

fn backend_with(
    entries: serde_json::Value,
) -> (tempfile::TempDir, gateways::FixtureChatBackend, CallLog) {
    let (dir, store) = scripted(entries);
    let log = CallLog::new();
    let backend = store.chat_backend(log.clone());
    (dir, backend, log)
}

// ── classify ────────────────────────────────────────────────────────────

#[test]
fn forced_mode_bypasses_the_backend() {
    let (_d, backend, log) = backend_with(serde_json::json!([]));
    let deck = sample_deck();
    let request = AdaptationRequest::forced("fix typo", Mode::Refine);
    let need = classify_need(&backend, &request, &deck_summary(&deck)).unwrap();
    assert_eq!(need.mode, Mode::Refine);
    assert_eq!(need.rationale, "forced");
    assert!(log.records().is_empty(), "no backend call for forced mode");
}

#[test]
fn classify_parses_the_mode_token() {
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "classify", "response": "Recompose: full restructure needed"}
    ]));
    let deck = sample_deck();
    let need = classify_need(
        &backend,
        &AdaptationRequest::new("rebuild for non-majors"),
        &deck_summary(&deck),
    )
    .unwrap();
    assert_eq!(need.mode, Mode::Recompose);
}

#[test]
fn classify_first_token_wins_when_both_appear() {
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "classify", "response": "refine is enough here, not a recompose"}
    ]));
    let deck = sample_deck();
    let need = classify_need(
        &backend,
        &AdaptationRequest::new("small tweak"),
        &deck_summary(&deck),
    )
    .unwrap();
    assert_eq!(need.mode, Mode::Refine);
}

#[test]
fn classify_rejects_answers_without_either_token() {
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "classify", "response": "maybe"}
    ]));
    let deck = sample_deck();
    let err = classify_need(
        &backend,
        &AdaptationRequest::new("?"),
        &deck_summary(&deck),
    )
    .unwrap_err();
    assert!(matches!(err, PlanningError::UnparseableClassification(raw) if raw == "maybe"));
}

// ── instructional design ────────────────────────────────────────────────

const FULL_DESIGN: &str = "COURSE_INFO: Intro biology, week 4\n\
STUDENT_ANALYSIS: first-years without lab experience\n\
INSTRUCTIONAL_FLOW:\n- hook with a news story\n- core concept\n- activity\n\
LEARNING_OBJECTIVES:\n- explain the mechanism\n\
DIFFICULT_POINTS:\n- enzyme terminology";

#[test]
fn design_parses_all_five_sections() {
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "design", "response": FULL_DESIGN}
    ]));
    let deck = sample_deck();
    let design = build_instructional_design(
        &backend,
        &AdaptationRequest::new("adapt for first-years"),
        &deck_summary(&deck),
        &MaterialSet::default(),
    )
    .unwrap();
    assert_eq!(design.course_info, "Intro biology, week 4");
    assert_eq!(design.instructional_flow.len(), 3);
    assert_eq!(design.difficult_points, vec!["enzyme terminology"]);
}

#[test]
fn design_missing_section_is_an_error() {
    let partial = "COURSE_INFO: x\nSTUDENT_ANALYSIS: y\nINSTRUCTIONAL_FLOW:\n- a\n\
LEARNING_OBJECTIVES:\n- b";
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "design", "response": partial}
    ]));
    let deck = sample_deck();
    let err = build_instructional_design(
        &backend,
        &AdaptationRequest::new("r"),
        &deck_summary(&deck),
        &MaterialSet::default(),
    )
    .unwrap_err();
    assert!(matches!(err, PlanningError::MissingDesignField("difficult_points")));
}

#[test]
fn identical_fixtures_yield_identical_designs() {
    let deck = sample_deck();
    let mut designs = Vec::new();
    for _ in 0..2 {
        let (_d, backend, _) = backend_with(serde_json::json!([
            {"tag": "design", "response": FULL_DESIGN}
        ]));
        designs.push(
            build_instructional_design(
                &backend,
                &AdaptationRequest::new("r"),
                &deck_summary(&deck),
                &MaterialSet::default(),
            )
            .unwrap(),
        );
    }
    assert_eq!(designs[0], designs[1]);
}

// ── guideline ───────────────────────────────────────────────────────────

fn design_fixture() -> planning::InstructionalDesign {
    planning::InstructionalDesign {
        course_info: "c".into(),
        student_analysis: "s".into(),
        instructional_flow: vec!["f".into()],
        learning_objectives: vec!["o".into()],
        difficult_points: vec!["d".into()],
    }
}

#[test]
fn guideline_accepts_valid_slide_refs() {
    let reply = serde_json::json!({
        "gap_findings": [
            {"slide": 0, "finding": "intro lacks context"},
            {"slide": 2, "finding": "no activity"}
        ],
        "core_modifications": ["add an opening hook", "turn wrap-up into an activity"]
    });
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "guideline", "response": reply.to_string()}
    ]));
    let deck = sample_deck();
    let guideline =
        derive_adaptive_guideline(&backend, &design_fixture(), &deck_summary(&deck)).unwrap();
    assert_eq!(guideline.gap_findings.len(), 2);
    assert_eq!(guideline.gap_findings[1].slide, SlideRef::Index(2));
}

#[test]
fn guideline_rejects_dangling_slide_refs() {
    let reply = serde_json::json!({
        "gap_findings": [{"slide": 9, "finding": "?"}],
        "core_modifications": ["x"]
    });
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "guideline", "response": reply.to_string()}
    ]));
    let deck = sample_deck();
    let err = derive_adaptive_guideline(&backend, &design_fixture(), &deck_summary(&deck))
        .unwrap_err();
    assert!(matches!(err, PlanningError::DanglingSlideRef(9)));
}

#[test]
fn guideline_without_modifications_is_an_error() {
    let reply = serde_json::json!({"gap_findings": [], "core_modifications": []});
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "guideline", "response": reply.to_string()}
    ]));
    let deck = sample_deck();
    let err = derive_adaptive_guideline(&backend, &design_fixture(), &deck_summary(&deck))
        .unwrap_err();
    assert!(matches!(err, PlanningError::EmptyGuideline));
}

// ── directive ───────────────────────────────────────────────────────────

#[test]
fn directive_keeps_step_order() {
    let reply = serde_json::json!({"steps": [
        {"target": "slide 1 title", "instruction": "update year to 2024"},
        {"target": "slide 1 body", "instruction": "swap example"},
        {"target": "slide 2", "instruction": "fix typo"}
    ]});
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "directive", "response": reply.to_string()}
    ]));
    let deck = sample_deck();
    let directive = refine_directive(
        &backend,
        &AdaptationRequest::new("update slide 2's example to 2024 data"),
        &deck_summary(&deck),
    )
    .unwrap();
    assert_eq!(directive.steps.len(), 3);
    assert_eq!(directive.steps[0].instruction, "update year to 2024");
    assert_eq!(directive.steps[2].target, "slide 2");
}

#[test]
fn directive_with_no_steps_is_an_error() {
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "directive", "response": "{\"steps\": []}"}
    ]));
    let deck = sample_deck();
    let err = refine_directive(
        &backend,
        &AdaptationRequest::new("r"),
        &deck_summary(&deck),
    )
    .unwrap_err();
    assert!(matches!(err, PlanningError::EmptyDirective));
}

// ── queries ─────────────────────────────────────────────────────────────

#[test]
fn queries_parse_dedup_and_allow_empty() {
    let guideline = planning::AdaptiveGuideline {
        gap_findings: vec![],
        core_modifications: vec!["update the case study".into()],
    };
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "queries", "response": "[\"2024 EV market share case study\", \"2024 EV market share case study\"]"},
        {"tag": "queries", "response": "[]"}
    ]));
    let deck = sample_deck();
    let queries =
        formulate_queries(&backend, PlanBasis::Guideline(&guideline), &deck_summary(&deck))
            .unwrap();
    assert_eq!(queries, vec!["2024 EV market share case study"]);

    let empty =
        formulate_queries(&backend, PlanBasis::Guideline(&guideline), &deck_summary(&deck))
            .unwrap();
    assert!(empty.is_empty());
}

// ── plan compilation ────────────────────────────────────────────────────

fn valid_plan_json() -> serde_json::Value {
    serde_json::json!({
        "version": 1,
        "mode": "refine",
        "slides": [
            {"action": "keep", "source_index": 0, "target_index": 0, "instructions": []},
            {"action": "modify", "source_index": 1, "target_index": 1, "instructions": [
                {"op": "replace_text", "element_id": "s1-t0", "new_text": "Case study 2024"},
                {"op": "delete_text", "element_id": "s1-t1"}
            ]},
            {"action": "add", "target_index": 2, "instructions": [
                {"op": "add_text_box", "text": "New activity", "box": {"x": 0, "y": 0, "w": 914400, "h": 914400}}
            ]}
        ]
    })
}

#[test]
fn plan_compiles_and_passes_the_gate() {
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "plan", "response": valid_plan_json().to_string()}
    ]));
    let deck = sample_deck();
    let directive = planning::Directive {
        steps: vec![planning::DirectiveStep {
            target: "slide 1".into(),
            instruction: "update".into(),
        }],
        queries: vec![],
    };
    let plan = build_execution_plan(
        &backend,
        PlanBasis::Directive(&directive),
        &deck,
        &InformationPacket::default(),
    )
    .unwrap();
    assert_eq!(plan.slides.len(), 3);
    assert_eq!(plan.count_actions(), (1, 1, 1));
    assert!(validate_plan(&plan, &deck).is_empty());
}

#[test]
fn plan_with_keep_instructions_fails_the_gate() {
    let mut bad = valid_plan_json();
    bad["slides"][0]["instructions"] =
        serde_json::json!([{"op": "delete_text", "element_id": "s0-t0"}]);
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "plan", "response": bad.to_string()}
    ]));
    let deck = sample_deck();
    let directive = planning::Directive {
        steps: vec![planning::DirectiveStep {
            target: "t".into(),
            instruction: "i".into(),
        }],
        queries: vec![],
    };
    let err = build_execution_plan(
        &backend,
        PlanBasis::Directive(&directive),
        &deck,
        &InformationPacket::default(),
    )
    .unwrap_err();
    match err {
        PlanningError::PlanInvalid(errors) => {
            assert!(errors
                .iter()
                .any(|e| matches!(e, PlanError::KeepWithInstructions { target_index: 0 })));
        }
        other => panic!("expected PlanInvalid, got {other:?}"),
    }
}

#[test]
fn non_json_plan_reply_is_a_parse_error() {
    let (_d, backend, _) = backend_with(serde_json::json!([
        {"tag": "plan", "response": "Sure! Here is what I would do: keep everything."}
    ]));
    let deck = sample_deck();
    let directive = planning::Directive {
        steps: vec![planning::DirectiveStep {
            target: "t".into(),
            instruction: "i".into(),
        }],
        queries: vec![],
    };
    let err = build_execution_plan(
        &backend,
        PlanBasis::Directive(&directive),
        &deck,
        &InformationPacket::default(),
    )
    .unwrap_err();
    assert!(matches!(err, PlanningError::PlanParseError(_)));
}

// ── validate_plan directly ──────────────────────────────────────────────

#[test]
fn validate_flags_out_of_range_source() {
    let deck = sample_deck();
    let plan = ExecutionPlan {
        version: 1,
        mode: Mode::Refine,
        slides: vec![planning::SlideMapping {
            action: Action::Keep,
            source_index: Some(5),
            target_index: 0,
            instructions: vec![],
        }],
    };
    let errors = validate_plan(&plan, &deck);
    assert_eq!(
        errors,
        vec![PlanError::SourceIndexOutOfRange {
            target_index: 0,
            source_index: 5
        }]
    );
}

#[test]
fn validate_flags_unknown_elements() {
    let deck = sample_deck();
    let plan = ExecutionPlan {
        version: 1,
        mode: Mode::Refine,
        slides: vec![planning::SlideMapping {
            action: Action::Modify,
            source_index: Some(0),
            target_index: 0,
            instructions: vec![AtomicOperation::ReplaceText {
                element_id: "s0-t9".into(),
                new_text: "x".into(),
            }],
        }],
    };
    let errors = validate_plan(&plan, &deck);
    assert_eq!(
        errors,
        vec![PlanError::UnknownElement {
            target_index: 0,
            element_id: "s0-t9".to_string()
        }]
    );
}

#[test]
fn validate_accepts_a_well_formed_plan() {
    let deck = sample_deck();
    let plan: ExecutionPlan = serde_json::from_value(valid_plan_json()).unwrap();
    assert!(validate_plan(&plan, &deck).is_empty());
}

#[test]
fn validate_flags_bad_image_sources() {
    let deck = sample_deck();
    let plan = ExecutionPlan {
        version: 1,
        mode: Mode::Refine,
        slides: vec![planning::SlideMapping {
            action: Action::Add,
            source_index: None,
            target_index: 0,
            instructions: vec![AtomicOperation::AddImage {
                source: gateways::ImageSource::Url("not a url".into()),
                placement: planning::ImagePlacement::Box(BoundingBox::new(0, 0, 1, 1)),
            }],
        }],
    };
    let errors = validate_plan(&plan, &deck);
    assert!(matches!(errors[0], PlanError::InvalidImageSource { .. }));
}

// ── packet determinism (provenance invariant) ───────────────────────────

#[test]
fn every_snippet_carries_a_source() {
    let results = vec![(
        "q".to_string(),
        vec![SearchResult {
            title: "t".into(),
            url: "https://example.org/a".into(),
            snippet: "text".into(),
            image_urls: vec![],
        }],
    )];
    let packet = assemble_packet(&results, &MaterialSet::default());
    assert!(packet
        .topics
        .iter()
        .flat_map(|t| t.snippets.iter())
        .all(|s| !s.source.is_empty()));
}

// ── mode discipline over the whole phase ────────────────────────────────

#[test]
fn recompose_run_invokes_the_recompose_stages_only() {
    let guideline_reply = serde_json::json!({
        "gap_findings": [{"slide": 0, "finding": "needs hook"}],
        "core_modifications": ["rework intro"]
    });
    let (_d, backend, log) = backend_with(serde_json::json!([
        {"tag": "classify", "response": "recompose"},
        {"tag": "design", "response": FULL_DESIGN},
        {"tag": "guideline", "response": guideline_reply.to_string()},
        {"tag": "queries", "response": "[]"},
        {"tag": "plan", "response": valid_plan_json().to_string()}
    ]));
    let dir = tempfile::tempdir().unwrap();
    let store = FixtureStore::load(dir.path()).unwrap();
    let search = store.search_provider(log.clone());

    let deck = sample_deck();
    let outcome = run_planning(
        &backend,
        &search,
        &deck,
        &AdaptationRequest::new("rebuild for a seminar"),
        &MaterialSet::default(),
        &PlanningOptions::default(),
    )
    .unwrap();
    assert_eq!(outcome.need.mode, Mode::Recompose);
    assert!(outcome.design.is_some() && outcome.guideline.is_some());
    assert!(outcome.directive.is_none());
    assert_eq!(log.chat_tags(), vec!["classify", "design", "guideline", "queries", "plan"]);
}

#[test]
fn refine_run_never_touches_design_or_guideline() {
    let directive_reply = serde_json::json!({"steps": [
        {"target": "slide 1", "instruction": "update the case study"}
    ]});
    let (_d, backend, log) = backend_with(serde_json::json!([
        {"tag": "classify", "response": "refine"},
        {"tag": "directive", "response": directive_reply.to_string()},
        {"tag": "plan", "response": valid_plan_json().to_string()}
    ]));
    let dir = tempfile::tempdir().unwrap();
    let store = FixtureStore::load(dir.path()).unwrap();
    let search = store.search_provider(log.clone());

    let deck = sample_deck();
    let outcome = run_planning(
        &backend,
        &search,
        &deck,
        &AdaptationRequest::new("update the case study"),
        &MaterialSet::default(),
        &PlanningOptions::default(),
    )
    .unwrap();
    assert_eq!(outcome.need.mode, Mode::Refine);
    assert!(outcome.design.is_none() && outcome.guideline.is_none());
    assert!(outcome.directive.is_some());
    assert_eq!(log.chat_tags(), vec!["classify", "directive", "plan"]);
}
