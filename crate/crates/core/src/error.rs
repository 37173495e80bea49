use thiserror::Error;

use crate::ramm::TraceEntry;

pub type Result<T> = std::result::Result<T, HidetifyError>;

#[derive(Debug, Error)]
pub enum HidetifyError {
    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("expectile level {0} is outside (0, 1)")]
    InvalidLevel(f64),

    #[error("invalid expectile sequence: {0}")]
    InvalidSequence(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    /// A column (or the response when `column` is `None`) has zero asymmetric
    /// variance on the rows it was evaluated on.
    #[error("{}", degenerate_message(*column, *subset))]
    DegenerateColumn {
        column: Option<usize>,
        subset: Option<usize>,
    },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid subset family: {0}")]
    InvalidSubsets(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("too few active observations: {active} remain, at least {required} required")]
    TooFewActive {
        active: usize,
        required: usize,
        /// Steps completed before the active set became too small.
        trace: Box<Vec<TraceEntry>>,
    },

    #[error("model II contamination requires p >= 20, got p = {0}")]
    ModelIIRequiresP20(usize),

    #[error("true influential set is empty")]
    EmptyTruth,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn degenerate_message(column: Option<usize>, subset: Option<usize>) -> String {
    let what = match column {
        Some(j) => format!("column {j}"),
        None => "response".to_string(),
    };
    match subset {
        Some(r) => format!("{what} has zero asymmetric variance on subset {r}"),
        None => format!("{what} has zero asymmetric variance"),
    }
}

impl HidetifyError {
    /// Attach a subset index to a degeneracy error raised while scoring a subset.
    pub(crate) fn in_subset(self, r: usize) -> Self {
        match self {
            HidetifyError::DegenerateColumn { column, .. } => HidetifyError::DegenerateColumn {
                column,
                subset: Some(r),
            },
            other => other,
        }
    }
}

impl HidetifyError {
    /// Process exit status for this error: 2 for invalid input or
    /// parameters, 3 for degenerate data, 4 for non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            HidetifyError::DegenerateColumn { .. } | HidetifyError::TooFewActive { .. } => 3,
            HidetifyError::NoConvergence { .. } => 4,
            _ => 2,
        }
    }
}
