//! Regenerates the bundled demo fixtures. Run explicitly after changing
//! the deck builder or the fixture formats:
//!
//!     cargo test -p deckadapt --test fixture_gen -- --ignored
//!
//! The demo is a 3-slide deck plus a scripted refine transcript; the rest
//! of the test suite and the README walk-through consume the committed
//! output at fixtures/demo/.

use std::path::PathBuf;

use deck_core::{tiny_png, BoundingBox, DeckBuilder, FontSpec, SlideSpec, EMU_PER_INCH};

fn demo_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/demo")
}

fn inch(n: i64) -> i64 {
    n * EMU_PER_INCH
}

fn chart_png() -> Vec<u8> {
    let mut img = image::RgbImage::new(64, 32);
    for (x, _, pixel) in img.enumerate_pixels_mut() {
        *pixel = if x < 32 {
            image::Rgb([40, 90, 200])
        } else {
            image::Rgb([240, 180, 30])
        };
    }
    let mut cursor = std::io::Cursor::new(Vec::new());
    image::DynamicImage::ImageRgb8(img)
        .write_to(&mut cursor, image::ImageFormat::Png)
        .unwrap();
    cursor.into_inner()
}

#[test]
#[ignore = "writes into fixtures/demo; run on purpose only"]
fn regenerate_demo_fixtures() {
    let dir = demo_dir();
    std::fs::create_dir_all(dir.join("images")).unwrap();

    let title_font = FontSpec {
        size_pt: Some(32.0),
        bold: Some(true),
        ..Default::default()
    };
    let deck = DeckBuilder::new()
        .slide(
            SlideSpec::new()
                .styled_text(
                    "Renewable Energy 101",
                    title_font.clone(),
                    BoundingBox::new(inch(1), inch(1), inch(8), inch(1)),
                )
                .text_at(
                    "Agenda: basics, case study, summary",
                    BoundingBox::new(inch(1), inch(2), inch(8), inch(1)),
                ),
        )
        .slide(
            SlideSpec::new()
                .styled_text(
                    "Case study: Solar adoption 2019",
                    title_font.clone(),
                    BoundingBox::new(inch(1), inch(1), inch(8), inch(1)),
                )
                .text_at(
                    "Figures from the 2019 market report",
                    BoundingBox::new(inch(1), inch(2), inch(6), inch(2)),
                ),
        )
        .slide(
            SlideSpec::new()
                .styled_text(
                    "Summary",
                    title_font,
                    BoundingBox::new(inch(1), inch(1), inch(8), inch(1)),
                )
                .image(tiny_png(), BoundingBox::new(inch(1), inch(2), inch(2), inch(2))),
        )
        .build()
        .unwrap();
    std::fs::write(dir.join("sample3.pptx"), deck).unwrap();

    std::fs::write(
        dir.join("request.txt"),
        "Update the case study slide to the 2024 solar adoption numbers and add the new chart.\n",
    )
    .unwrap();

    let plan = serde_json::json!({
        "version": 1,
        "mode": "refine",
        "slides": [
            {"action": "keep", "source_index": 0, "target_index": 0, "instructions": []},
            {"action": "modify", "source_index": 1, "target_index": 1, "instructions": [
                {"op": "replace_text", "element_id": "s1-t0",
                 "new_text": "Case study: Solar adoption 2024"},
                {"op": "replace_text", "element_id": "s1-t1",
                 "new_text": "Global capacity grew 29% in 2024"},
                {"op": "add_image",
                 "source": {"type": "url", "value": "https://fixtures.local/chart2024.png"},
                 "placement": {"x": 5_486_400, "y": 1_828_800, "w": 1_828_800, "h": 914_400}}
            ]},
            {"action": "keep", "source_index": 2, "target_index": 2, "instructions": []}
        ]
    });
    let directive = serde_json::json!({
        "steps": [
            {"target": "slide 1 title and body",
             "instruction": "replace the 2019 case study figures with the 2024 numbers"},
            {"target": "slide 1",
             "instruction": "add the 2024 adoption chart image next to the text"}
        ]
    });
    let transcripts = serde_json::json!([
        {"tag": "classify",
         "response": "refine: a targeted content update to one slide, not a restructure"},
        {"tag": "directive", "response": directive.to_string()},
        {"tag": "plan", "response": plan.to_string()}
    ]);
    std::fs::write(
        dir.join("transcripts.json"),
        serde_json::to_string_pretty(&transcripts).unwrap(),
    )
    .unwrap();

    std::fs::write(dir.join("search.json"), "{}\n").unwrap();

    std::fs::write(dir.join("images/chart2024.png"), chart_png()).unwrap();
    std::fs::write(
        dir.join("images/manifest.json"),
        serde_json::to_string_pretty(
            &serde_json::json!({"https://fixtures.local/chart2024.png": "chart2024.png"}),
        )
        .unwrap(),
    )
    .unwrap();
}
