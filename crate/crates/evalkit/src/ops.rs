//! Canonical operation sets and TP/FP/FN matching.
//!
//! Two canonical ops are comparable when they agree on (kind, slide,
//! element); adds carry no element and compare on (kind, slide). Strict
//! mode additionally requires payload-digest equality. Compatibility is
//! therefore an equivalence, and the maximum one-to-one matching is the
//! multiset intersection over keys.

use execution_qa::digest::{digest_bytes, digest_text};
use execution_qa::{ApplyLog, ApplyOutcome};
use gateways::ImageSource;
use planning::{AtomicOperation, ExecutionPlan};
use serde::{Deserialize, Serialize};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    DeleteText,
    ReplaceText,
    AddTextBox,
    DeleteImage,
    ReplaceImage,
    AddImage,
}

impl OpKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OpKind::DeleteText => "delete_text",
            OpKind::ReplaceText => "replace_text",
            OpKind::AddTextBox => "add_text_box",
            OpKind::DeleteImage => "delete_image",
            OpKind::ReplaceImage => "replace_image",
            OpKind::AddImage => "add_image",
        }
    }
}

/// One mutating operation in canonical form. `slide` is the target index;
/// `element` is unset for adds; `payload_digest` is unset for deletes.
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct CanonicalOp {
    pub kind: OpKind,
    pub slide: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_digest: Option<String>,
}

/// Either side of the comparison: a plan (intent) or an apply log
/// (execution).
#[derive(Debug, Clone, Copy)]
pub enum OpsSource<'a> {
    Plan(&'a ExecutionPlan),
    Log(&'a ApplyLog),
}

/// Canonicalize the mutating instructions of a plan or log. KEEP mappings
/// contribute nothing; log entries count only when they actually applied
/// (the last outcome per instruction wins across repair passes).
pub fn canonicalize_ops(source: OpsSource<'_>) -> Vec<CanonicalOp> {
    let mut ops = match source {
        OpsSource::Plan(plan) => plan
            .instructions()
            .map(|(target, _, op)| canonical_from_instruction(target, op))
            .collect::<Vec<_>>(),
        OpsSource::Log(log) => {
            let mut last: std::collections::BTreeMap<(usize, usize), &execution_qa::ApplyEntry> =
                std::collections::BTreeMap::new();
            for entry in &log.entries {
                last.insert((entry.target_index, entry.instruction_index), entry);
            }
            last.values()
                .filter(|e| matches!(e.outcome, ApplyOutcome::Applied))
                .map(|e| {
                    let mut op = canonical_from_instruction(e.target_index, &e.op);
                    if e.payload_digest.is_some() {
                        op.payload_digest = e.payload_digest.clone();
                    }
                    op
                })
                .collect()
        }
    };
    ops.sort();
    ops
}

fn canonical_from_instruction(slide: usize, op: &AtomicOperation) -> CanonicalOp {
    let (kind, element, payload_digest) = match op {
        AtomicOperation::DeleteText { element_id } => {
            (OpKind::DeleteText, Some(element_id.to_string()), None)
        }
        AtomicOperation::ReplaceText {
            element_id,
            new_text,
        } => (
            OpKind::ReplaceText,
            Some(element_id.to_string()),
            Some(digest_text(new_text)),
        ),
        AtomicOperation::AddTextBox { text, .. } => {
            (OpKind::AddTextBox, None, Some(digest_text(text)))
        }
        AtomicOperation::DeleteImage { element_id } => {
            (OpKind::DeleteImage, Some(element_id.to_string()), None)
        }
        AtomicOperation::ReplaceImage { element_id, source } => (
            OpKind::ReplaceImage,
            Some(element_id.to_string()),
            Some(source_digest(source)),
        ),
        AtomicOperation::AddImage { source, .. } => {
            (OpKind::AddImage, None, Some(source_digest(source)))
        }
    };
    CanonicalOp {
        kind,
        slide,
        element,
        payload_digest,
    }
}

/// Digest for an image payload known only by its source. Inline base64
/// decodes to the actual bytes; URL and path sources hash the descriptor
/// (the bytes are not available without fetching).
fn source_digest(source: &ImageSource) -> String {
    use base64::Engine;
    match source {
        ImageSource::Base64(b) => {
            let cleaned: String = b.chars().filter(|c| !c.is_whitespace()).collect();
            match base64::engine::general_purpose::STANDARD.decode(cleaned.as_bytes()) {
                Ok(bytes) => digest_bytes(&bytes),
                Err(_) => digest_text(b),
            }
        }
        ImageSource::Url(u) => digest_text(u),
        ImageSource::Path(p) => digest_text(p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// Match on (kind, slide, element).
    Lenient,
    /// Lenient plus payload-digest equality.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub pairing: Vec<(CanonicalOp, CanonicalOp)>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct MatchKey {
    kind: OpKind,
    slide: usize,
    element: Option<String>,
    payload: Option<Option<String>>,
}

fn key_of(op: &CanonicalOp, mode: MatchMode) -> MatchKey {
    MatchKey {
        kind: op.kind,
        slide: op.slide,
        element: op.element.clone(),
        payload: match mode {
            MatchMode::Lenient => None,
            MatchMode::Strict => Some(op.payload_digest.clone()),
        },
    }
}

/// Maximum-cardinality one-to-one matching between the system set S and
/// the reference set R. tp = |pairing|, fp = |S| - tp, fn = |R| - tp.
pub fn match_op_sets(s: &[CanonicalOp], r: &[CanonicalOp], mode: MatchMode) -> MatchResult {
    let mut r_buckets: std::collections::BTreeMap<MatchKey, Vec<&CanonicalOp>> =
        std::collections::BTreeMap::new();
    for op in r {
        r_buckets.entry(key_of(op, mode)).or_default().push(op);
    }

    let mut pairing = Vec::new();
    let mut sorted_s: Vec<&CanonicalOp> = s.iter().collect();
    sorted_s.sort();
    for op in sorted_s {
        if let Some(bucket) = r_buckets.get_mut(&key_of(op, mode)) {
            if let Some(matched) = bucket.pop() {
                pairing.push((op.clone(), matched.clone()));
            }
        }
    }

    let tp = pairing.len();
    MatchResult {
        tp,
        fp: s.len() - tp,
        fn_: r.len() - tp,
        pairing,
    }
}
