//! Judge harness: request construction and the render/parse round trip.

use std::collections::BTreeMap;

use deck_core::{deck_summary, load_deck, DeckBuilder, SlideSpec};
use evalkit::{
    build_judge_request, parse_judge_response, render_judge_reply, Criterion, CriterionScore,
    Dimension, EvalError, RubricReport, ALL_CRITERIA, DEFAULT_RUBRIC,
};
use planning::AdaptationRequest;
use proptest::prelude::*;

fn summaries() -> (deck_core::DeckSummary, deck_core::DeckSummary) {
    let a = load_deck(
        &DeckBuilder::new()
            .slide(SlideSpec::new().text("Before"))
            .build()
            .unwrap(),
    )
    .unwrap();
    let b = load_deck(
        &DeckBuilder::new()
            .slide(SlideSpec::new().text("After"))
            .build()
            .unwrap(),
    )
    .unwrap();
    (deck_summary(&a), deck_summary(&b))
}

#[test]
fn judge_request_is_deterministic_and_cold() {
    let (original, adapted) = summaries();
    let request = AdaptationRequest::new("update the case study");
    let one = build_judge_request(&original, &request, &adapted, DEFAULT_RUBRIC);
    let two = build_judge_request(&original, &request, &adapted, DEFAULT_RUBRIC);
    assert_eq!(one.temperature, 0.0);
    assert_eq!(one.prompt_digest(), two.prompt_digest(), "byte-identical prompt");
    assert_eq!(one.tag, "judge");
}

#[test]
fn rubric_text_is_embedded_verbatim() {
    let (original, adapted) = summaries();
    let request = AdaptationRequest::new("r");
    let req = build_judge_request(&original, &request, &adapted, DEFAULT_RUBRIC);
    let rendered = format!("{:?}", req.messages);
    assert!(rendered.contains("stylistic consistency"), "rubric present in prompt");
}

fn uniform_report(score: u8) -> RubricReport {
    let criteria: BTreeMap<Criterion, CriterionScore> = ALL_CRITERIA
        .iter()
        .map(|c| {
            (
                *c,
                CriterionScore {
                    score,
                    rationale: format!("uniform {score}"),
                },
            )
        })
        .collect();
    RubricReport::from_criteria(criteria).unwrap()
}

#[test]
fn uniform_scores_aggregate_to_the_same_dimension_means() {
    let report = uniform_report(4);
    for d in [Dimension::IA, Dimension::CC, Dimension::FA, Dimension::VC] {
        assert_eq!(report.dimension(d), 4.0);
    }
}

#[test]
fn mixed_scores_average_per_dimension() {
    let mut criteria = uniform_report(3).criteria;
    criteria.insert(
        Criterion::Ia1,
        CriterionScore {
            score: 5,
            rationale: "great".into(),
        },
    );
    let report = RubricReport::from_criteria(criteria).unwrap();
    assert_eq!(report.dimension(Dimension::IA), 4.0);
    assert_eq!(report.dimension(Dimension::FA), 3.0);
}

#[test]
fn missing_criterion_is_named() {
    let reply = serde_json::json!({
        "IA-1": {"score": 4, "rationale": "ok"},
        "IA-2": {"score": 4, "rationale": "ok"},
        "CC-1": {"score": 4, "rationale": "ok"},
        "CC-2": {"score": 4, "rationale": "ok"},
        "FA-1": {"score": 4, "rationale": "ok"},
        "VC-1": {"score": 4, "rationale": "ok"}
    });
    let err = parse_judge_response(&reply.to_string()).unwrap_err();
    assert_eq!(err, EvalError::MissingCriterion("VC-2".to_string()));
}

#[test]
fn out_of_range_score_is_named_with_its_value() {
    let mut obj = serde_json::Map::new();
    for c in ALL_CRITERIA {
        obj.insert(
            c.as_str().to_string(),
            serde_json::json!({"score": 3, "rationale": "ok"}),
        );
    }
    obj.insert("IA-1".into(), serde_json::json!({"score": 6, "rationale": "x"}));
    let err = parse_judge_response(&serde_json::Value::Object(obj).to_string()).unwrap_err();
    assert_eq!(
        err,
        EvalError::ScoreOutOfRange {
            criterion: "IA-1".to_string(),
            value: 6
        }
    );
}

#[test]
fn fenced_judge_reply_still_parses() {
    let fenced = format!("```json\n{}\n```", render_judge_reply(&uniform_report(2)));
    let report = parse_judge_response(&fenced).unwrap();
    assert_eq!(report, uniform_report(2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn render_parse_round_trip(scores in proptest::collection::vec(1u8..=5, 7),
                               rationales in proptest::collection::vec(".{0,40}", 7)) {
        let criteria: BTreeMap<Criterion, CriterionScore> = ALL_CRITERIA
            .iter()
            .zip(scores.iter().zip(rationales.iter()))
            .map(|(c, (score, rationale))| {
                (*c, CriterionScore { score: *score, rationale: rationale.clone() })
            })
            .collect();
        let report = RubricReport::from_criteria(criteria).unwrap();
        let parsed = parse_judge_response(&render_judge_reply(&report)).unwrap();
        prop_assert_eq!(parsed, report);
    }
}
