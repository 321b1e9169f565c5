use thiserror::Error;

use planning::PlanError;

#[derive(Debug, Error)]
pub enum ExecutionError {
    #[error("plan must pass validation before execution ({} problems)", .0.len())]
    PlanNotValidated(Vec<PlanError>),

    #[error("operation {got} handed to the {expected} interpreter")]
    WrongOpKind {
        expected: &'static str,
        got: &'static str,
    },

    #[error("cannot read image dimensions: {0}")]
    ImageDimensions(String),

    #[error(transparent)]
    Deck(#[from] deck_core::DeckError),

    #[error(transparent)]
    Fetch(#[from] gateways::GatewayError),
}

pub type Result<T> = std::result::Result<T, ExecutionError>;
