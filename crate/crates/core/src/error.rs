use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("dimension {requested} exceeds the cap of {cap} entries")]
    Dimension { requested: usize, cap: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("label error: {0}")]
    Label(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("invalid event: {0}")]
    Event(String),
    #[error("invalid observer frame: {0}")]
    Frame(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid hidden-variable model: {0}")]
    Model(String),
    #[error("conditional probability undefined: conditioning event {0} has probability zero")]
    UndefinedConditional(String),
}
