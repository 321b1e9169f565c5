//! Deterministic generators for randomized property suites: build a small
//! deck, derive a valid plan over it, and predict the element counts the
//! executor must produce. Everything resolves offline (image payloads are
//! inline base64), so generated cases run without fixtures.

use base64::Engine;
use deck_core::{
    load_deck, tiny_gif, tiny_png, BoundingBox, DeckBuilder, DeckDocument, FontSpec, SlideSpec,
};
use gateways::ImageSource;
use planning::{Action, AtomicOperation, ExecutionPlan, ImagePlacement, Mode, SlideMapping};
use rand::Rng;

pub fn random_deck<R: Rng>(rng: &mut R) -> DeckDocument {
    let slide_count = rng.gen_range(1..=4);
    let mut builder = DeckBuilder::new();
    for s in 0..slide_count {
        let mut spec = SlideSpec::new();
        for t in 0..rng.gen_range(0..=3) {
            spec = spec.styled_text(
                &format!("slide {s} text {t} item {}", rng.gen_range(0..1000)),
                FontSpec::default(),
                random_box(rng),
            );
        }
        for i in 0..rng.gen_range(0..=2) {
            let bytes = if i % 2 == 0 { tiny_png() } else { tiny_gif() };
            spec = spec.image(bytes, random_box(rng));
        }
        builder = builder.slide(spec);
    }
    load_deck(&builder.build().expect("generated deck builds")).expect("generated deck loads")
}

fn random_box<R: Rng>(rng: &mut R) -> BoundingBox {
    BoundingBox::new(
        rng.gen_range(0..6_000_000),
        rng.gen_range(0..5_000_000),
        rng.gen_range(300_000..3_000_000),
        rng.gen_range(300_000..3_000_000),
    )
}

fn inline_png() -> ImageSource {
    ImageSource::Base64(base64::engine::general_purpose::STANDARD.encode(tiny_png()))
}

/// A plan that passes `validate_plan` against `deck`: random KEEP/MODIFY/
/// drop per source slide plus up to two ADD mappings, with at most one
/// operation per existing element so application never conflicts.
pub fn random_valid_plan<R: Rng>(rng: &mut R, deck: &DeckDocument) -> ExecutionPlan {
    let mut mappings: Vec<SlideMapping> = Vec::new();

    for source in 0..deck.slide_count() {
        match rng.gen_range(0..10) {
            0..=3 => mappings.push(SlideMapping {
                action: Action::Keep,
                source_index: Some(source),
                target_index: 0,
                instructions: vec![],
            }),
            4..=7 => {
                let instructions = random_modify_ops(rng, deck, source);
                mappings.push(SlideMapping {
                    action: Action::Modify,
                    source_index: Some(source),
                    target_index: 0,
                    instructions,
                });
            }
            _ => {} // dropped: absence from the mapping is the encoding
        }
    }

    for _ in 0..rng.gen_range(0..=2) {
        let position = rng.gen_range(0..=mappings.len());
        mappings.insert(
            position,
            SlideMapping {
                action: Action::Add,
                source_index: None,
                target_index: 0,
                instructions: random_add_ops(rng),
            },
        );
    }

    if mappings.is_empty() {
        mappings.push(SlideMapping {
            action: Action::Keep,
            source_index: Some(0),
            target_index: 0,
            instructions: vec![],
        });
    }

    for (i, mapping) in mappings.iter_mut().enumerate() {
        mapping.target_index = i;
    }
    ExecutionPlan {
        version: planning::PLAN_VERSION,
        mode: Mode::Refine,
        slides: mappings,
    }
}

fn random_modify_ops<R: Rng>(
    rng: &mut R,
    deck: &DeckDocument,
    source: usize,
) -> Vec<AtomicOperation> {
    let slide = deck.slide(source).expect("source exists");
    let mut ops = Vec::new();
    for text in slide.texts() {
        match rng.gen_range(0..10) {
            0..=2 => ops.push(AtomicOperation::ReplaceText {
                element_id: text.id.clone(),
                new_text: format!("replaced {}", rng.gen_range(0..1000)),
            }),
            3..=4 => ops.push(AtomicOperation::DeleteText {
                element_id: text.id.clone(),
            }),
            _ => {}
        }
    }
    for image in slide.images() {
        match rng.gen_range(0..10) {
            0..=1 => ops.push(AtomicOperation::DeleteImage {
                element_id: image.id.clone(),
            }),
            2..=3 => ops.push(AtomicOperation::ReplaceImage {
                element_id: image.id.clone(),
                source: inline_png(),
            }),
            _ => {}
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        ops.push(random_add_text(rng));
    }
    if rng.gen_bool(0.3) {
        ops.push(random_add_image(rng));
    }
    if ops.is_empty() {
        ops.push(random_add_text(rng));
    }
    ops
}

fn random_add_ops<R: Rng>(rng: &mut R) -> Vec<AtomicOperation> {
    let mut ops = vec![random_add_text(rng)];
    if rng.gen_bool(0.5) {
        ops.push(random_add_image(rng));
    }
    ops
}

fn random_add_text<R: Rng>(rng: &mut R) -> AtomicOperation {
    AtomicOperation::AddTextBox {
        text: format!("added note {}", rng.gen_range(0..100_000)),
        bounds: random_box(rng),
        font: FontSpec {
            size_pt: if rng.gen_bool(0.5) { Some(20.0) } else { None },
            ..Default::default()
        },
    }
}

fn random_add_image<R: Rng>(rng: &mut R) -> AtomicOperation {
    let placement = if rng.gen_bool(0.5) {
        ImagePlacement::Box(random_box(rng))
    } else {
        ImagePlacement::Scaled {
            x: rng.gen_range(0..5_000_000),
            y: rng.gen_range(0..5_000_000),
            scale: [0.5, 1.0, 2.0][rng.gen_range(0..3)],
        }
    };
    AtomicOperation::AddImage {
        source: inline_png(),
        placement,
    }
}

/// Per-target (text, image) element counts the plan implies, for the
/// count-arithmetic invariant: counts' = counts + adds - deletes.
pub fn predicted_counts(plan: &ExecutionPlan, deck: &DeckDocument) -> Vec<(usize, usize)> {
    plan.slides
        .iter()
        .map(|m| {
            let (mut texts, mut images) = match m.source_index {
                Some(s) => {
                    let slide = deck.slide(s).expect("source exists");
                    (slide.texts().len() as i64, slide.images().len() as i64)
                }
                None => (0, 0),
            };
            for op in &m.instructions {
                match op {
                    AtomicOperation::AddTextBox { .. } => texts += 1,
                    AtomicOperation::DeleteText { .. } => texts -= 1,
                    AtomicOperation::AddImage { .. } => images += 1,
                    AtomicOperation::DeleteImage { .. } => images -= 1,
                    _ => {}
                }
            }
            (texts.max(0) as usize, images.max(0) as usize)
        })
        .collect()
}
