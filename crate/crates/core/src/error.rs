use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,

    #[error("missing column {0:?} in input header")]
    MissingColumn(String),

    #[error("duplicate column {0:?} in input header")]
    DuplicateHeader(String),

    #[error("row {row}: missing value for column {column:?}")]
    MissingValue { row: usize, column: String },

    #[error("row {row}: value {value:?} in column {column:?} is not a finite number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("no quasi-identifiers remain")]
    NoQuasiIdentifiers,

    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),

    #[error("attribute {0:?} is not quasi-numeric")]
    NotNumeric(String),

    #[error("taxonomy input is empty")]
    EmptyTaxonomy,

    #[error("taxonomy line {line}: {reason}")]
    MalformedTaxonomy { line: usize, reason: String },

    #[error("taxonomy has multiple roots: {0:?}")]
    MultipleRoots(Vec<String>),

    #[error("taxonomy contains a cycle through {0:?}")]
    Cycle(String),

    #[error("taxonomy node {0:?} has more than one parent")]
    DuplicateChild(String),

    #[error("value {0:?} is not a label of the taxonomy")]
    UnknownLabel(String),

    #[error("value {0:?} is an interior taxonomy node, not a leaf")]
    NotALeaf(String),

    #[error("value {value:?} is shorter than the mask length {suffix_len}")]
    MaskTooLong { value: String, suffix_len: usize },

    #[error("categorical attribute {0:?} has neither a taxonomy nor a mask rule")]
    MissingTaxonomy(String),

    #[error("record {0} does not exist in the dataset")]
    UnknownRecord(usize),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("dataset has no records")]
    EmptyDataset,

    #[error("k must be at least 1")]
    InvalidK,

    #[error("{n} records cannot satisfy a minimum group size of {k}")]
    Infeasible { n: usize, k: usize },

    #[error("exhaustive search over {n} records refused (cap {cap}, about {estimate} partitions)")]
    OracleTooLarge {
        n: usize,
        cap: usize,
        estimate: u128,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that mean the requested constraint cannot be met by the data,
    /// as opposed to malformed data or configuration.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Infeasible { .. } | Error::OracleTooLarge { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
