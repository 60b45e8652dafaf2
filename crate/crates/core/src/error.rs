use thiserror::Error;

use crate::space::Violation;

/// Everything that can go wrong across the toolkit.
///
/// Failed checks are not errors: audits and verdicts carry their failures as
/// report content. Errors are reserved for bad inputs and broken contracts.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {value} lies outside carrier `{carrier}` (requires {bound})")]
    Domain {
        carrier: String,
        value: f64,
        bound: String,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("iterate {index} escaped the carrier: {source}")]
    IterateEscaped {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("table rejected:\n{}", render_violations(.0))]
    Rejected(Vec<Violation>),

    #[error("malformed table: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn render_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}
