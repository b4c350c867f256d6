use thiserror::Error;

/// Errors raised by samplers, the metric engine and the estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid has {nodes} nodes, above the configured budget of {budget}")]
    Budget { nodes: usize, budget: usize },

    #[error("dimension {found} not supported here (expected {expected})")]
    Dimension { expected: &'static str, found: usize },

    #[error("truncation N = {requested} too small: tail variance {tail:.3e} exceeds {tolerance:.1e} at radius {radius:.3}; need N >= {required}")]
    Truncation {
        requested: usize,
        required: usize,
        radius: f64,
        tail: f64,
        tolerance: f64,
    },

    #[error("circulant embedding not nonnegative: worst eigenvalue {worst:.3e}; try padding factor {suggested_padding}")]
    Embedding { worst: f64, suggested_padding: usize },

    #[error("invalid parameter `{field}`: {reason}")]
    Param { field: &'static str, reason: String },

    #[error("map `{map}` fails the {condition} probe at x = {at}")]
    MapCondition {
        map: String,
        condition: &'static str,
        at: f64,
    },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("density is not a colouring: node {node} has value {value}")]
    NotColouring { node: usize, value: f64 },

    #[error("i/o: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Param {
            field,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
