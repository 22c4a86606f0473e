use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("basis truncation not converged: relative shift {shift:.3e} at basis size {basis_size}")]
    Truncation { shift: f64, basis_size: usize },

    #[error("Fourier tail {tail:.3e} exceeds tolerance; increase grid resolution")]
    Resolution { tail: f64 },

    #[error("level policy error: {0}")]
    Policy(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty sector: {n_particles} particles on {n_sites} sites")]
    EmptySector { n_sites: usize, n_particles: usize },

    #[error("{what} did not converge (best residual {residual:.3e})")]
    NotConverged { what: &'static str, residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Configuration/validation problems as opposed to numerical breakdowns.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Policy(_) | Error::Precondition(_) | Error::EmptySector { .. })
    }
}
