use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate row name `{0}`")]
    DuplicateRow(String),
    #[error("row `{row}` references variable index {index} but the model has {count} variables")]
    BadVariableIndex { row: String, index: usize, count: usize },
    #[error("variable `{name}` has invalid bounds [{lower}, {upper}]")]
    BadBounds { name: String, lower: f64, upper: f64 },
    #[error("binary variable `{0}` must have bounds inside [0, 1]")]
    BinaryBounds(String),
    #[error("non-finite coefficient in `{0}`")]
    NonFinite(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("name `{0}` is not representable in free MPS (empty, contains whitespace, or longer than 255 chars)")]
    BadName(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum SolutionFileError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: unknown variable `{name}`")]
    UnknownName { line: usize, name: String },
    #[error("line {line}: variable `{name}` listed twice")]
    Duplicate { line: usize, name: String },
    #[error("line {line}: cannot parse value `{value}`")]
    BadValue { line: usize, value: String },
    #[error("line {line}: expected `name value`")]
    Malformed { line: usize },
}
