//! Fixture replay, image fetching, and live-transport error mapping.
//! The only sockets opened here are loopback listeners owned by the test.

use std::io::{Read, Write};
use std::net::TcpListener;

use base64::Engine;
use gateways::{
    complete_chat, describe_slide_images, fetch_image, search_web, CallLog, ChatBackend,
    ChatRequest, Channel, FixtureStore, GatewayError, HttpChatBackend, ImageSource,
    LocalImageFetcher, Transport,
};

fn write_fixtures(dir: &std::path::Path) {
    std::fs::write(
        dir.join("transcripts.json"),
        serde_json::json!([
            {"tag": "classify", "response": "refine"},
            {"tag": "describe", "response": "bar chart of enrollment"}
        ])
        .to_string(),
    )
    .unwrap();
    std::fs::write(
        dir.join("search.json"),
        serde_json::json!({
            "CRISPR classroom examples": [
                {"title": "Intro", "url": "https://example.edu/crispr", "snippet": "CRISPR in teaching", "image_urls": []},
                {"title": "Cases", "url": "https://example.edu/cases", "snippet": "Case studies", "image_urls": ["https://example.edu/fig.png"]}
            ]
        })
        .to_string(),
    )
    .unwrap();
    let images = dir.join("images");
    std::fs::create_dir_all(&images).unwrap();
    std::fs::write(images.join("fig.png"), deck_core::tiny_png()).unwrap();
    std::fs::write(
        images.join("manifest.json"),
        serde_json::json!({"https://example.edu/fig.png": "fig.png"}).to_string(),
    )
    .unwrap();
}

#[test]
fn transcript_entry_replays_once_then_misses() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let store = FixtureStore::load(dir.path()).unwrap();
    let log = CallLog::new();
    let backend = store.chat_backend(log.clone());

    let req = ChatRequest::new("classify").user("Update slide 2 to 2024 data");
    let resp = complete_chat(&backend, &req).unwrap();
    assert_eq!(resp.text, "refine");

    let err = complete_chat(&backend, &req).unwrap_err();
    assert!(matches!(err, GatewayError::FixtureMiss { .. }), "exhausted entry must miss");
    assert_eq!(log.chat_tags(), vec!["classify", "classify"]);
    assert_eq!(log.http_calls(), 0);
}

#[test]
fn digest_pinned_entry_rejects_a_different_prompt() {
    let dir = tempfile::tempdir().unwrap();
    let pinned = ChatRequest::new("plan").user("expected prompt");
    let digest = pinned.prompt_digest();
    std::fs::write(
        dir.path().join("transcripts.json"),
        serde_json::json!([{"tag": "plan", "prompt_digest": digest[..12], "response": "ok"}])
            .to_string(),
    )
    .unwrap();
    let store = FixtureStore::load(dir.path()).unwrap();
    let backend = store.chat_backend(CallLog::new());

    let err = backend
        .complete(&ChatRequest::new("plan").user("some other prompt"))
        .unwrap_err();
    assert!(matches!(err, GatewayError::FixtureMiss { digest: Some(_), .. }));
}

#[test]
fn search_replays_the_exact_query() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let store = FixtureStore::load(dir.path()).unwrap();
    let provider = store.search_provider(CallLog::new());

    let results = search_web(&provider, "CRISPR classroom examples", 5).unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0].url, "https://example.edu/crispr");
    assert_eq!(results[1].image_urls, vec!["https://example.edu/fig.png"]);

    assert!(matches!(
        search_web(&provider, "unprepared query", 5),
        Err(GatewayError::FixtureMiss { .. })
    ));
    assert!(matches!(search_web(&provider, "  ", 5), Err(GatewayError::EmptyQuery)));
}

#[test]
fn search_drops_results_without_absolute_urls() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("search.json"),
        serde_json::json!({
            "q": [
                {"title": "ok", "url": "https://example.org/a", "snippet": "s", "image_urls": []},
                {"title": "relative", "url": "/just/a/path", "snippet": "s", "image_urls": []}
            ]
        })
        .to_string(),
    )
    .unwrap();
    let store = FixtureStore::load(dir.path()).unwrap();
    let provider = store.search_provider(CallLog::new());
    let results = search_web(&provider, "q", 5).unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0].url, "https://example.org/a");
}

#[test]
fn image_sources_are_equivalent_across_delivery_kinds() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let store = FixtureStore::load(dir.path()).unwrap();
    let log = CallLog::new();
    let fetcher = store.image_fetcher(log.clone());

    let by_url = fetch_image(&fetcher, &ImageSource::Url("https://example.edu/fig.png".into()))
        .unwrap();
    let by_path = fetch_image(
        &fetcher,
        &ImageSource::Path(dir.path().join("images/fig.png").display().to_string()),
    )
    .unwrap();
    let b64 = base64::engine::general_purpose::STANDARD.encode(deck_core::tiny_png());
    let by_b64 = fetch_image(&fetcher, &ImageSource::Base64(b64)).unwrap();

    assert_eq!(by_url.bytes, by_path.bytes);
    assert_eq!(by_path.bytes, by_b64.bytes);
    assert_eq!(by_url.content_type, "image/png");
    assert!(log.records().iter().all(|r| r.transport != Transport::Http));
}

#[test]
fn html_payload_is_rejected_with_detected_type() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("page.html"), b"<!DOCTYPE html><html></html>").unwrap();
    let fetcher = LocalImageFetcher::new(CallLog::new());
    let err = fetch_image(
        &fetcher,
        &ImageSource::Path(dir.path().join("page.html").display().to_string()),
    )
    .unwrap_err();
    match err {
        GatewayError::UnsupportedImageType { detected } => assert_eq!(detected, "text/html"),
        other => panic!("expected UnsupportedImageType, got {other}"),
    }
}

#[test]
fn describe_pairs_fixture_lines_with_image_ids() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let store = FixtureStore::load(dir.path()).unwrap();
    let backend = store.chat_backend(CallLog::new());

    let deck_bytes = deck_core::DeckBuilder::new()
        .slide(deck_core::SlideSpec::new().text("Enrollment"))
        .slide(deck_core::SlideSpec::new().image(
            deck_core::tiny_png(),
            deck_core::BoundingBox::new(0, 0, 914_400, 914_400),
        ))
        .build()
        .unwrap();
    let deck = deck_core::load_deck(&deck_bytes).unwrap();

    let empty = describe_slide_images(&backend, &deck, 0).unwrap();
    assert!(empty.descriptions.is_empty());

    let described = describe_slide_images(&backend, &deck, 1).unwrap();
    assert_eq!(described.descriptions.len(), 1);
    assert_eq!(described.descriptions[0].1, "bar chart of enrollment");
    assert_eq!(described.descriptions[0].0.as_str(), "s1-i0");
}

#[test]
fn describe_skips_unsupported_media_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("transcripts.json"),
        serde_json::json!([{"tag": "describe", "response": "a green square"}]).to_string(),
    )
    .unwrap();
    let store = FixtureStore::load(dir.path()).unwrap();
    let backend = store.chat_backend(CallLog::new());

    let deck_bytes = deck_core::DeckBuilder::new()
        .slide(
            deck_core::SlideSpec::new()
                .image(deck_core::tiny_gif(), deck_core::BoundingBox::new(0, 0, 1, 1))
                .image(deck_core::tiny_png(), deck_core::BoundingBox::new(0, 0, 1, 1)),
        )
        .build()
        .unwrap();
    let deck = deck_core::load_deck(&deck_bytes).unwrap();

    let result = describe_slide_images(&backend, &deck, 0).unwrap();
    assert_eq!(result.descriptions.len(), 1, "gif skipped, png described");
    assert_eq!(result.descriptions[0].0.as_str(), "s0-i1");
    assert_eq!(result.warnings.len(), 1);
    assert!(result.warnings[0].contains("image/gif"));
}

#[test]
fn describe_rejects_out_of_range_slide() {
    let dir = tempfile::tempdir().unwrap();
    let store = FixtureStore::load(dir.path()).unwrap();
    let backend = store.chat_backend(CallLog::new());
    let deck_bytes = deck_core::DeckBuilder::new()
        .slide(deck_core::SlideSpec::new().text("only"))
        .build()
        .unwrap();
    let deck = deck_core::load_deck(&deck_bytes).unwrap();
    let err = describe_slide_images(&backend, &deck, 5).unwrap_err();
    assert!(matches!(
        err,
        GatewayError::Deck(deck_core::DeckError::SlideIndexOutOfRange { .. })
    ));
}

/// Serve `n` canned HTTP responses on a loopback socket.
fn serve_n(listener: TcpListener, status_line: &'static str, body: &'static str, n: usize) {
    std::thread::spawn(move || {
        for _ in 0..n {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = [0u8; 4096];
            let _ = stream.read(&mut buf);
            let resp = format!(
                "{status_line}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(resp.as_bytes());
        }
    });
}

#[test]
fn live_http_500_maps_to_transport_after_retries() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    // Retry policy is two retries, so three responses get consumed.
    serve_n(listener, "HTTP/1.1 500 Internal Server Error", "{\"error\":\"boom\"}", 3);

    let log = CallLog::new();
    let backend = HttpChatBackend::new(format!("http://{addr}/chat"), "k", "test-model", log.clone());
    let err = backend
        .complete(&ChatRequest::new("classify").user("hello"))
        .unwrap_err();
    match err {
        GatewayError::Transport { status, .. } => assert_eq!(status, Some(500)),
        other => panic!("expected Transport, got {other}"),
    }
    assert_eq!(log.http_calls(), 1, "one logical call despite retries");
    assert_eq!(
        log.records()[0].channel,
        Channel::Chat
    );
}

#[test]
fn live_success_extracts_first_choice_text() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    serve_n(
        listener,
        "HTTP/1.1 200 OK",
        "{\"choices\":[{\"text\":\"Recompose: restructure\"}],\"usage\":{\"prompt_units\":12,\"completion_units\":4}}",
        1,
    );

    let backend = HttpChatBackend::new(format!("http://{addr}/chat"), "k", "test-model", CallLog::new());
    let resp = backend
        .complete(&ChatRequest::new("classify").user("hi"))
        .unwrap();
    assert_eq!(resp.text, "Recompose: restructure");
    assert_eq!(resp.usage, Some((12, 4)));
}
