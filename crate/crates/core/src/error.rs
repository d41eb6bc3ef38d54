use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SsgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite {what}{}", fmt_location(*.iteration))]
    NonFinite {
        what: &'static str,
        iteration: Option<usize>,
    },

    #[error("parameter regime violated: {0}")]
    Regime(String),

    #[error("Slater condition fails: g(x_feas) = {g_feas} is not negative")]
    InvalidSlater { g_feas: f64 },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("no nearly-feasible iterate to sample from (smallest g seen: {min_g})")]
    NoFeasibleIterate { min_g: f64 },

    #[error("outer iteration {outer}: {source}")]
    Outer {
        outer: usize,
        #[source]
        source: Box<SsgError>,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty dataset: {0}")]
    EmptyData(String),

    #[error("group rule `{rule}` leaves the {group} group empty")]
    EmptyGroup { rule: String, group: &'static str },

    #[error("{0} is not implemented")]
    Unimplemented(&'static str),
}

fn fmt_location(iteration: Option<usize>) -> String {
    match iteration {
        Some(t) => format!(" at iteration {t}"),
        None => String::new(),
    }
}

impl SsgError {
    pub(crate) fn at_iteration(self, t: usize) -> Self {
        match self {
            SsgError::NonFinite { what, .. } => SsgError::NonFinite {
                what,
                iteration: Some(t),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, SsgError>;
