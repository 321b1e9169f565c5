//! Evaluation machinery: canonical operation sets with TP/FP/FN matching
//! and precision/recall/F1 scoring, plus the rubric-based judge harness.
//! Everything here is a pure function over its inputs.

mod error;
mod judge;
mod ops;
mod scores;

pub use error::{EvalError, Result};
pub use judge::{
    build_judge_request, parse_judge_response, render_judge_reply, CriterionScore, Criterion,
    Dimension, RubricReport, ALL_CRITERIA, DEFAULT_RUBRIC,
};
pub use ops::{canonicalize_ops, match_op_sets, CanonicalOp, MatchMode, MatchResult, OpKind, OpsSource};
pub use scores::{f1_from_pr, macro_average, prf1, OpsReport, Scores, TaskScores};
