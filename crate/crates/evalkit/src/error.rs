use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("tp, fp and fn are all zero; nothing to score")]
    AllZeroCounts,

    #[error("cannot average an empty score list")]
    EmptyList,

    #[error("judge reply is missing criterion {0}")]
    MissingCriterion(String),

    #[error("criterion {criterion} score {value} is outside 1..=5")]
    ScoreOutOfRange { criterion: String, value: i64 },

    #[error("judge reply is not the expected JSON shape: {0}")]
    JudgeParse(String),
}

pub type Result<T> = std::result::Result<T, EvalError>;
