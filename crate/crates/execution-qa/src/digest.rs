//! Payload digests shared by the apply log and operation canonicalization.
//! Text payloads are whitespace-normalized and case-folded before hashing
//! so cosmetic differences do not break matching.

use sha2::{Digest, Sha256};

/// Collapse runs of whitespace to single spaces, trim, lowercase.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

pub fn digest_text(text: &str) -> String {
    digest_bytes(normalize_text(text).as_bytes())
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitespace_and_case_do_not_matter() {
        assert_eq!(digest_text("  Hello \n world "), digest_text("hello world"));
        assert_ne!(digest_text("hello world"), digest_text("hello worlds"));
    }
}
