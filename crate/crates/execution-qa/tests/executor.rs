//! Executor/validator behaviour: pointwise effects, fault injection, and
//! the coherence properties over randomized plans.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use deck_core::{
    extract_slide_text, list_slide_images, load_deck, save_deck, tiny_png, BoundingBox,
    DeckBuilder, ElementId, FontSpec, SlideSpec, EMU_PER_INCH,
};
use execution_qa::{
    apply_plan, apply_plan_with_hook, apply_text_op, repair_loop, repair_loop_with_hook,
    testgen, validate_outcome, ApplyOutcome, SlideDigests,
};
use gateways::{CallLog, GatewayError, ImageAsset, ImageFetcher, ImageSource, LocalImageFetcher};
use planning::{Action, AtomicOperation, ExecutionPlan, ImagePlacement, Mode, SlideMapping};
use rand::SeedableRng;

fn sample_deck() -> deck_core::DeckDocument {
    let bytes = DeckBuilder::new()
        .slide(SlideSpec::new().text("Intro"))
        .slide(SlideSpec::new().text("Old title").text("Body text"))
        .slide(
            SlideSpec::new()
                .text("Closing")
                .image(tiny_png(), BoundingBox::new(0, 0, EMU_PER_INCH, EMU_PER_INCH)),
        )
        .build()
        .unwrap();
    load_deck(&bytes).unwrap()
}

fn keep_all(deck: &deck_core::DeckDocument) -> ExecutionPlan {
    ExecutionPlan {
        version: 1,
        mode: Mode::Refine,
        slides: (0..deck.slide_count())
            .map(|i| SlideMapping {
                action: Action::Keep,
                source_index: Some(i),
                target_index: i,
                instructions: vec![],
            })
            .collect(),
    }
}

fn local_assets() -> LocalImageFetcher {
    LocalImageFetcher::new(CallLog::new())
}

fn inline_png_source() -> ImageSource {
    use base64::Engine;
    ImageSource::Base64(base64::engine::general_purpose::STANDARD.encode(tiny_png()))
}

// ── apply_plan ──────────────────────────────────────────────────────────

#[test]
fn all_keep_identity_preserves_the_model_with_empty_log() {
    let deck = sample_deck();
    let (out, log) = apply_plan(&deck, &keep_all(&deck), &local_assets()).unwrap();
    assert_eq!(out.model(), deck.model());
    assert!(log.entries.is_empty());
}

#[test]
fn modify_touches_exactly_the_addressed_slide() {
    let deck = sample_deck();
    let plan = ExecutionPlan {
        version: 1,
        mode: Mode::Refine,
        slides: vec![
            SlideMapping {
                action: Action::Keep,
                source_index: Some(0),
                target_index: 0,
                instructions: vec![],
            },
            SlideMapping {
                action: Action::Modify,
                source_index: Some(1),
                target_index: 1,
                instructions: vec![AtomicOperation::ReplaceText {
                    element_id: "s1-t0".into(),
                    new_text: "New title".into(),
                }],
            },
            SlideMapping {
                action: Action::Keep,
                source_index: Some(2),
                target_index: 2,
                instructions: vec![],
            },
        ],
    };
    let (out, log) = apply_plan(&deck, &plan, &local_assets()).unwrap();
    assert_eq!(log.failed_count(), 0);
    assert_eq!(extract_slide_text(&out, 1).unwrap()[0].1, "New title");
    assert_eq!(
        extract_slide_text(&out, 0).unwrap(),
        extract_slide_text(&deck, 0).unwrap()
    );
    assert_eq!(
        extract_slide_text(&out, 2).unwrap(),
        extract_slide_text(&deck, 2).unwrap()
    );
}

#[test]
fn add_mapping_builds_a_new_slide_with_both_elements() {
    let deck = sample_deck();
    let box_text = BoundingBox::new(EMU_PER_INCH, EMU_PER_INCH, EMU_PER_INCH * 4, EMU_PER_INCH);
    let box_img = BoundingBox::new(0, 0, EMU_PER_INCH * 2, EMU_PER_INCH * 2);
    let mut plan = keep_all(&deck);
    plan.slides.push(SlideMapping {
        action: Action::Add,
        source_index: None,
        target_index: 3,
        instructions: vec![
            AtomicOperation::AddTextBox {
                text: "Discussion".into(),
                bounds: box_text,
                font: FontSpec {
                    size_pt: Some(24.0),
                    bold: Some(true),
                    ..Default::default()
                },
            },
            AtomicOperation::AddImage {
                source: inline_png_source(),
                placement: ImagePlacement::Box(box_img),
            },
        ],
    });

    let (out, log) = apply_plan(&deck, &plan, &local_assets()).unwrap();
    assert_eq!(log.failed_count(), 0);
    assert_eq!(out.slide_count(), deck.slide_count() + 1);

    // Verify through a full save/load cycle, not just in memory.
    let reloaded = load_deck(&save_deck(&out).unwrap()).unwrap();
    assert_eq!(reloaded.slide_count(), 4);
    let texts = extract_slide_text(&reloaded, 3).unwrap();
    assert_eq!(texts.len(), 1);
    assert_eq!(texts[0].1, "Discussion");
    let slide = reloaded.slide(3).unwrap();
    let element = slide.find_text(&texts[0].0).unwrap();
    assert_eq!(element.first_font().size_pt, Some(24.0));
    assert_eq!(element.first_font().bold, Some(true));
    assert_eq!(element.bounds, box_text);
    let images = list_slide_images(&reloaded, 3).unwrap();
    assert_eq!(images.len(), 1);
    assert_eq!(images[0].2, box_img);
    // The new slide inherits a layout from the preceding slides.
    assert!(slide.layout_ref().is_some());
}

#[test]
fn unvalidated_plan_is_refused() {
    let deck = sample_deck();
    let plan = ExecutionPlan {
        version: 1,
        mode: Mode::Refine,
        slides: vec![SlideMapping {
            action: Action::Keep,
            source_index: Some(9),
            target_index: 0,
            instructions: vec![],
        }],
    };
    let err = apply_plan(&deck, &plan, &local_assets()).unwrap_err();
    assert!(matches!(err, execution_qa::ExecutionError::PlanNotValidated(_)));
}

#[test]
fn dropping_a_source_slide_is_expressed_by_absence() {
    let deck = sample_deck();
    let plan = ExecutionPlan {
        version: 1,
        mode: Mode::Refine,
        slides: vec![
            SlideMapping {
                action: Action::Keep,
                source_index: Some(2),
                target_index: 0,
                instructions: vec![],
            },
            SlideMapping {
                action: Action::Keep,
                source_index: Some(0),
                target_index: 1,
                instructions: vec![],
            },
        ],
    };
    let (out, _) = apply_plan(&deck, &plan, &local_assets()).unwrap();
    assert_eq!(out.slide_count(), 2);
    assert_eq!(extract_slide_text(&out, 0).unwrap()[0].1, "Closing");
    assert_eq!(extract_slide_text(&out, 1).unwrap()[0].1, "Intro");
    let reloaded = load_deck(&save_deck(&out).unwrap()).unwrap();
    assert_eq!(reloaded.slide_count(), 2);
}

// ── individual op semantics ─────────────────────────────────────────────

#[test]
fn replace_to_empty_keeps_the_element() {
    let mut deck = sample_deck();
    apply_text_op(
        &mut deck,
        1,
        &AtomicOperation::ReplaceText {
            element_id: "s1-t0".into(),
            new_text: String::new(),
        },
    )
    .unwrap();
    let texts = extract_slide_text(&deck, 1).unwrap();
    assert_eq!(texts.len(), 2);
    assert_eq!(texts[0].1, "");
}

#[test]
fn delete_keeps_survivor_ids() {
    let mut deck = sample_deck();
    apply_text_op(
        &mut deck,
        1,
        &AtomicOperation::DeleteText {
            element_id: "s1-t0".into(),
        },
    )
    .unwrap();
    let texts = extract_slide_text(&deck, 1).unwrap();
    assert_eq!(texts.len(), 1);
    assert_eq!(texts[0].0, ElementId::new("s1-t1"));
}

#[test]
fn ops_on_out_of_range_slides_are_rejected() {
    let mut deck = sample_deck();
    let err = apply_text_op(
        &mut deck,
        9,
        &AtomicOperation::ReplaceText {
            element_id: "s9-t0".into(),
            new_text: "x".into(),
        },
    )
    .unwrap_err();
    assert!(matches!(
        err,
        execution_qa::ExecutionError::Deck(deck_core::DeckError::SlideIndexOutOfRange { .. })
    ));

    let mut fetched = Vec::new();
    let err = execution_qa::apply_image_op(
        &mut deck,
        9,
        &AtomicOperation::DeleteImage {
            element_id: "s9-i0".into(),
        },
        &local_assets(),
        &mut fetched,
    )
    .unwrap_err();
    assert!(matches!(
        err,
        execution_qa::ExecutionError::Deck(deck_core::DeckError::SlideIndexOutOfRange { .. })
    ));
}

#[test]
fn text_op_on_unknown_element_names_it() {
    let mut deck = sample_deck();
    let err = apply_text_op(
        &mut deck,
        0,
        &AtomicOperation::DeleteText {
            element_id: "s0-t7".into(),
        },
    )
    .unwrap_err();
    assert!(err.to_string().contains("s0-t7"));
}

#[test]
fn scale_rule_is_96_dpi_exact() {
    // A 96x96 pixel PNG at scale 1.0 must come out exactly one inch square.
    let png96 = {
        let img = image::RgbImage::from_pixel(96, 96, image::Rgb([10, 200, 10]));
        let mut cursor = std::io::Cursor::new(Vec::new());
        image::DynamicImage::ImageRgb8(img)
            .write_to(&mut cursor, image::ImageFormat::Png)
            .unwrap();
        cursor.into_inner()
    };
    use base64::Engine;
    let source = ImageSource::Base64(base64::engine::general_purpose::STANDARD.encode(&png96));

    let mut deck = sample_deck();
    let mut fetched = Vec::new();
    execution_qa::apply_image_op(
        &mut deck,
        0,
        &AtomicOperation::AddImage {
            source,
            placement: ImagePlacement::Scaled {
                x: 100,
                y: 200,
                scale: 1.0,
            },
        },
        &local_assets(),
        &mut fetched,
    )
    .unwrap();
    let images = list_slide_images(&deck, 0).unwrap();
    assert_eq!(images.len(), 1);
    assert_eq!(images[0].2, BoundingBox::new(100, 200, EMU_PER_INCH, EMU_PER_INCH));
    assert_eq!(fetched.len(), 1);
    assert_eq!(fetched[0].len, png96.len());
}

#[test]
fn replace_image_preserves_the_box() {
    let mut deck = sample_deck();
    let before = list_slide_images(&deck, 2).unwrap();
    let mut fetched = Vec::new();
    execution_qa::apply_image_op(
        &mut deck,
        2,
        &AtomicOperation::ReplaceImage {
            element_id: before[0].0.clone(),
            source: inline_png_source(),
        },
        &local_assets(),
        &mut fetched,
    )
    .unwrap();
    let after = list_slide_images(&deck, 2).unwrap();
    assert_eq!(after[0].2, before[0].2);
}

#[test]
fn failed_fetch_is_a_log_entry_not_an_abort() {
    let deck = sample_deck();
    let mut plan = keep_all(&deck);
    plan.slides[1] = SlideMapping {
        action: Action::Modify,
        source_index: Some(1),
        target_index: 1,
        instructions: vec![
            AtomicOperation::ReplaceText {
                element_id: "s1-t0".into(),
                new_text: "still applied".into(),
            },
            AtomicOperation::AddImage {
                source: ImageSource::Path("/nonexistent/asset.png".into()),
                placement: ImagePlacement::Box(BoundingBox::new(0, 0, 1, 1)),
            },
        ],
    };
    let (out, log) = apply_plan(&deck, &plan, &local_assets()).unwrap();
    assert_eq!(log.entries.len(), 2);
    assert!(matches!(log.entries[0].outcome, ApplyOutcome::Applied));
    assert!(matches!(log.entries[1].outcome, ApplyOutcome::Failed { .. }));
    assert_eq!(extract_slide_text(&out, 1).unwrap()[0].1, "still applied");
}

// ── validate_outcome ────────────────────────────────────────────────────

#[test]
fn faithful_application_validates_clean() {
    let deck = sample_deck();
    let mut plan = keep_all(&deck);
    plan.slides[1] = SlideMapping {
        action: Action::Modify,
        source_index: Some(1),
        target_index: 1,
        instructions: vec![
            AtomicOperation::ReplaceText {
                element_id: "s1-t0".into(),
                new_text: "Fresh".into(),
            },
            AtomicOperation::AddTextBox {
                text: "Note".into(),
                bounds: BoundingBox::new(10, 10, 1000, 1000),
                font: FontSpec::default(),
            },
        ],
    };
    let pre = SlideDigests::capture(&deck);
    let (out, log) = apply_plan(&deck, &plan, &local_assets()).unwrap();
    assert_eq!(log.failed_count(), 0);
    let report = validate_outcome(&out, &plan, &pre);
    assert!(report.pass, "unexpected discrepancies: {:?}", report.discrepancies);
}

#[test]
fn skipped_instruction_yields_exactly_one_named_discrepancy() {
    let deck = sample_deck();
    let mut plan = keep_all(&deck);
    plan.slides[1] = SlideMapping {
        action: Action::Modify,
        source_index: Some(1),
        target_index: 1,
        instructions: vec![
            AtomicOperation::ReplaceText {
                element_id: "s1-t0".into(),
                new_text: "A".into(),
            },
            AtomicOperation::ReplaceText {
                element_id: "s1-t1".into(),
                new_text: "B".into(),
            },
        ],
    };
    let pre = SlideDigests::capture(&deck);
    let (out, _) = apply_plan_with_hook(&deck, &plan, &local_assets(), &mut |t, i| {
        !(t == 1 && i == 1)
    })
    .unwrap();
    let report = validate_outcome(&out, &plan, &pre);
    assert!(!report.pass);
    assert_eq!(report.discrepancies.len(), 1);
    assert_eq!(report.discrepancies[0].target_index, 1);
    assert_eq!(report.discrepancies[0].instruction_index, Some(1));
}

#[test]
fn keep_slide_mutated_out_of_band_is_a_digest_mismatch() {
    let deck = sample_deck();
    let plan = keep_all(&deck);
    let pre = SlideDigests::capture(&deck);
    let (mut out, _) = apply_plan(&deck, &plan, &local_assets()).unwrap();
    out.slide_mut(0)
        .unwrap()
        .replace_text(&ElementId::new("s0-t0"), "tampered")
        .unwrap();
    let report = validate_outcome(&out, &plan, &pre);
    assert!(!report.pass);
    assert_eq!(report.discrepancies.len(), 1);
    assert_eq!(report.discrepancies[0].target_index, 0);
    assert_eq!(report.discrepancies[0].instruction_index, None);
    assert!(report.discrepancies[0].expected.contains("digest"));
}

// ── repair loop ─────────────────────────────────────────────────────────

#[test]
fn clean_plan_converges_in_one_iteration() {
    let deck = sample_deck();
    let outcome = repair_loop(&deck, &keep_all(&deck), &local_assets(), 3).unwrap();
    assert!(outcome.converged);
    assert_eq!(outcome.iterations_used, 1);
    assert_eq!(outcome.reports.len(), 1);
    assert_eq!(outcome.deck.model(), deck.model());
}

/// Fails the first `failures` fetches of each source, then succeeds.
struct FlakyFetcher {
    inner: LocalImageFetcher,
    failures: usize,
    seen: Mutex<std::collections::HashMap<String, usize>>,
}

impl FlakyFetcher {
    fn new(failures: usize) -> Self {
        FlakyFetcher {
            inner: local_assets(),
            failures,
            seen: Mutex::new(std::collections::HashMap::new()),
        }
    }
}

impl ImageFetcher for FlakyFetcher {
    fn fetch(&self, source: &ImageSource) -> gateways::Result<ImageAsset> {
        let mut seen = self.seen.lock().unwrap();
        let count = seen.entry(source.describe()).or_insert(0);
        *count += 1;
        if *count <= self.failures {
            return Err(GatewayError::FetchFailed {
                src: source.describe(),
                reason: "scripted transient failure".into(),
            });
        }
        self.inner.fetch(source)
    }
}

fn plan_with_one_image_add(deck: &deck_core::DeckDocument) -> ExecutionPlan {
    let mut plan = keep_all(deck);
    plan.slides[0] = SlideMapping {
        action: Action::Modify,
        source_index: Some(0),
        target_index: 0,
        instructions: vec![AtomicOperation::AddImage {
            source: inline_png_source(),
            placement: ImagePlacement::Box(BoundingBox::new(0, 0, 1000, 1000)),
        }],
    };
    plan
}

#[test]
fn transient_asset_failure_converges_on_the_second_iteration() {
    let deck = sample_deck();
    let plan = plan_with_one_image_add(&deck);
    let outcome = repair_loop(&deck, &plan, &FlakyFetcher::new(1), 3).unwrap();
    assert!(outcome.converged);
    assert_eq!(outcome.iterations_used, 2);
    assert_eq!(outcome.reports.len(), 2);
    assert!(!outcome.reports[0].pass);
    assert!(outcome.reports[1].pass);
}

#[test]
fn permanent_failure_stops_at_max_iters_citing_the_instruction() {
    let deck = sample_deck();
    let plan = plan_with_one_image_add(&deck);
    let outcome = repair_loop(&deck, &plan, &FlakyFetcher::new(usize::MAX), 3).unwrap();
    assert!(!outcome.converged);
    assert_eq!(outcome.iterations_used, 3);
    assert_eq!(outcome.reports.len(), 3);
    let last = outcome.reports.last().unwrap();
    assert_eq!(last.discrepancies.len(), 1);
    assert_eq!(last.discrepancies[0].target_index, 0);
    assert_eq!(last.discrepancies[0].instruction_index, Some(0));
}

#[test]
fn injected_skip_is_repaired_within_two_iterations() {
    let deck = sample_deck();
    let mut plan = keep_all(&deck);
    plan.slides[2] = SlideMapping {
        action: Action::Modify,
        source_index: Some(2),
        target_index: 2,
        instructions: vec![AtomicOperation::ReplaceText {
            element_id: "s2-t0".into(),
            new_text: "Final".into(),
        }],
    };
    let skipped = AtomicUsize::new(0);
    let outcome = repair_loop_with_hook(&deck, &plan, &local_assets(), 3, &mut |_, _| {
        skipped.fetch_add(1, Ordering::Relaxed);
        false
    })
    .unwrap();
    assert_eq!(skipped.load(Ordering::Relaxed), 1);
    assert!(outcome.converged);
    assert_eq!(outcome.iterations_used, 2);
    assert_eq!(extract_slide_text(&outcome.deck, 2).unwrap()[0].1, "Final");
}

// ── randomized coherence properties ─────────────────────────────────────

#[test]
fn randomized_plans_uphold_coherence_keep_immutability_and_counts() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let assets = local_assets();
    for trial in 0..60 {
        let deck = testgen::random_deck(&mut rng);
        let plan = testgen::random_valid_plan(&mut rng, &deck);
        assert!(planning::validate_plan(&plan, &deck).is_empty(), "trial {trial}");

        let pre = SlideDigests::capture(&deck);
        let (out, log) = apply_plan(&deck, &plan, &assets).unwrap();
        assert_eq!(log.failed_count(), 0, "trial {trial}: no failures expected");

        // Executor/validator coherence.
        let report = validate_outcome(&out, &plan, &pre);
        assert!(
            report.pass,
            "trial {trial}: discrepancies {:?}",
            report.discrepancies
        );

        // KEEP immutability at model level.
        for mapping in &plan.slides {
            if mapping.action == Action::Keep {
                let source = mapping.source_index.unwrap();
                assert_eq!(
                    deck.model().slides[source],
                    out.model().slides[mapping.target_index],
                    "trial {trial}: KEEP slide changed"
                );
            }
        }

        // Count arithmetic.
        let predicted = testgen::predicted_counts(&plan, &deck);
        for (i, (texts, images)) in predicted.iter().enumerate() {
            let slide = out.slide(i).unwrap();
            assert_eq!(slide.texts().len(), *texts, "trial {trial} slide {i} texts");
            assert_eq!(slide.images().len(), *images, "trial {trial} slide {i} images");
        }
    }
}
