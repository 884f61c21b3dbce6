use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or expansion could not certify the requested accuracy.
    #[error("accuracy failure: {0}")]
    Accuracy(String),

    /// A kernel symbol was evaluated at (or next to) its pole.
    #[error("pole of the Laplace symbol at s = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    /// FFT contour parameters cannot deliver the requested weight accuracy.
    #[error("contour failure: {0}")]
    Contour(String),

    /// Blow-up profile least-squares fit was rejected.
    #[error("profile fit failure: {0}")]
    Fit(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
