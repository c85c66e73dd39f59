//! Error type shared across the suite.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes do not line up (e.g. matmul with a.cols != b.rows).
    #[error(
        "shape mismatch: left operand is {a_rows}x{a_cols}, right operand is {b_rows}x{b_cols}"
    )]
    ShapeMismatch {
        a_rows: usize,
        a_cols: usize,
        b_rows: usize,
        b_cols: usize,
    },

    /// FFT column length must be a power of two.
    #[error("signal length {len} is not a power of two")]
    NotPowerOfTwo { len: usize },

    /// Invalid configuration value (sizes, probabilities, plan parameters).
    #[error("invalid config: {0}")]
    Config(String),

    /// Resource acquisition failed (staging arena allocation, bundled data).
    #[error("resource: {0}")]
    Resource(String),

    /// Report assembly failed (missing measurement pairing, empty report).
    #[error("report: {0}")]
    Report(String),

    /// A benchmark cell failed; carries the (workload, size, backend) context.
    #[error("workload {workload}, size {size}, backend {backend}: {source}")]
    Cell {
        workload: String,
        size: String,
        backend: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the benchmark cell it occurred in.
    pub fn in_cell(self, workload: &str, size: &str, backend: &str) -> Self {
        Error::Cell {
            workload: workload.to_string(),
            size: size.to_string(),
            backend: backend.to_string(),
            source: Box::new(self),
        }
    }
}
