use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("duplicate symbol label `{0}`")]
    DuplicateSymbol(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("adjacency entries must be 0 or 1 (row {row}, column {col})")]
    NotBinary { row: usize, col: usize },
    #[error("negative transition probability at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize },
    #[error("row {row} of the transition matrix sums to {sum}, not 1")]
    RowSum { row: usize, sum: String },
    #[error("transition matrix support differs from the adjacency at ({row}, {col})")]
    Incompatible { row: usize, col: usize },
    #[error("transition structure is reducible: states {component:?} form a component that is not the whole alphabet")]
    Reducible { component: Vec<usize> },
    #[error("shift is not primitive")]
    NotPrimitive,
    #[error("shift has no infinite sequences")]
    EmptyShift,
    #[error("block length must be at least 1")]
    InvalidBlockLength,
    #[error("no allowed blocks of length {0}")]
    NoAllowedBlocks(usize),
    #[error("factor map is not surjective: image symbol `{0}` has no preimage")]
    NotSurjective(String),
    #[error("factor map has {domain} source symbols but {image} target symbols")]
    FactorTooLarge { domain: usize, image: usize },
    #[error("domain transition ({from}, {to}) maps onto a pair forbidden by the image adjacency")]
    ImageTooSmall { from: usize, to: usize },
    #[error("word {0:?} is not allowed")]
    DisallowedWord(Vec<usize>),
    #[error("conditioning event {0:?} has probability zero")]
    ZeroProbability(Vec<usize>),
    #[error("fibre over {0:?} is empty")]
    EmptyFibre(Vec<usize>),
    #[error("transition matrix is not strictly positive")]
    NotPositive,
    #[error("function table has no value for fibre word {0:?}")]
    DomainMismatch(Vec<usize>),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
