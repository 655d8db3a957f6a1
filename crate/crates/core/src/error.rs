use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("element `{0}` is not in the universe")]
    UnknownElement(String),

    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),

    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),

    #[error("unknown quantifier `{0}`")]
    UnknownQuantifier(String),

    #[error("arity mismatch for `{symbol}`: expected {expected}, got {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("variable `{0}` has no assigned element")]
    UnassignedVariable(String),

    #[error("formula is not quantifier-free: {0}")]
    NotQuantifierFree(String),

    #[error("formula has free variables: {}", .0.join(", "))]
    FreeVariables(Vec<String>),

    #[error("{what} exceeds the configured cap of {cap}")]
    CapExceeded { what: String, cap: usize },

    #[error("inconsistent pins: {0}")]
    InconsistentPins(String),

    #[error("invalid quantifier definition: {0}")]
    InvalidQuantifier(String),

    #[error("structure is not quasi-homogeneous: tuples {left:?} and {right:?} share an atomic type but no self-embedding maps one to the other")]
    NotQuasiHomogeneous {
        left: Vec<String>,
        right: Vec<String>,
    },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("structure {index} does not embed into structure {next}", next = .index + 1)]
    NotAChain { index: usize },

    #[error("formula has the wrong shape: {0}")]
    FormulaShape(String),

    #[error("chain too short to witness stabilization of `{subformula}`")]
    ChainTooShort { subformula: String },

    #[error("unknown catalog structure `{0}`")]
    UnknownCatalog(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{0}")]
    Symbolic(String),

    #[error("{0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn cap(what: impl Into<String>, cap: usize) -> Self {
        Error::CapExceeded {
            what: what.into(),
            cap,
        }
    }

    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}
