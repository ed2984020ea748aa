use crate::oracles::ElementId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("element {0} is not part of the universe")]
    UnknownElement(ElementId),

    #[error("element {0} is already alive")]
    AlreadyAlive(ElementId),

    #[error("element {0} is not alive")]
    NotAlive(ElementId),

    #[error("element {0} is not a member of the solution")]
    NotAMember(ElementId),

    #[error("capacity {0} is not a positive power of two")]
    CapacityNotPowerOfTwo(usize),

    #[error("level {level} out of range (structure has levels 0..={max})")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("brute force budget exceeded: {elements} elements, rank {rank} (limit {max_elements} elements, rank {max_rank})")]
    BudgetExceeded {
        elements: usize,
        rank: usize,
        max_elements: usize,
        max_rank: usize,
    },

    #[error("no operations have been applied")]
    NoOperations,

    #[error("{algorithm} does not support deletions (operation {index})")]
    Unsupported { algorithm: &'static str, index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid universe: {0}")]
    InvalidUniverse(String),

    #[error("line {line}: {message}")]
    Stream { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
