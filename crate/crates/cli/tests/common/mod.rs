//! Shared helpers for the CLI test suites.

use std::path::PathBuf;
use std::process::Command;

pub fn demo_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/demo")
}

/// The compiled binary with live-credential env scrubbed, so a test can
/// never accidentally reach a network backend.
pub fn deckadapt() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_deckadapt"));
    for var in [
        "LLM_API_KEY",
        "SEARCH_API_KEY",
        "LLM_ENDPOINT",
        "LLM_MODEL",
        "SEARCH_ENDPOINT",
    ] {
        cmd.env_remove(var);
    }
    cmd
}

pub fn adapt_demo_into(work: &std::path::Path) -> std::process::Output {
    let demo = demo_dir();
    deckadapt()
        .current_dir(work)
        .args([
            "adapt",
            "--deck",
            demo.join("sample3.pptx").to_str().unwrap(),
            "--request-file",
            demo.join("request.txt").to_str().unwrap(),
            "--fixtures",
            demo.to_str().unwrap(),
            "--out",
            "adapted.pptx",
        ])
        .output()
        .expect("binary runs")
}
