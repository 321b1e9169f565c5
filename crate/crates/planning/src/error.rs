use thiserror::Error;

use crate::plan::PlanError;

#[derive(Debug, Error)]
pub enum PlanningError {
    #[error("classification response contains neither mode token: {0:?}")]
    UnparseableClassification(String),

    #[error("instructional design reply is missing the {0} section")]
    MissingDesignField(&'static str),

    #[error("guideline references slide {0}, which does not exist")]
    DanglingSlideRef(usize),

    #[error("guideline lists no core modifications")]
    EmptyGuideline,

    #[error("directive contains no steps")]
    EmptyDirective,

    #[error("execution plan reply is not valid plan JSON: {0}")]
    PlanParseError(String),

    #[error("execution plan failed validation: {}", render_plan_errors(.0))]
    PlanInvalid(Vec<PlanError>),

    #[error("unparseable {stage} reply: {detail}")]
    ResponseParse { stage: &'static str, detail: String },

    #[error(transparent)]
    Gateway(#[from] gateways::GatewayError),
}

fn render_plan_errors(errors: &[PlanError]) -> String {
    errors
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, PlanningError>;
