use thiserror::Error;

/// Errors produced by the solver and analysis modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("r = {r} is outside the admissible range {range} of {geometry}")]
    Domain {
        geometry: String,
        r: f64,
        range: String,
    },

    #[error("t_k has a pole at r = {r} for k = {k} (c_k vanishes)")]
    Pole { k: i8, r: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("right-hand side has nonzero weighted mean {mean:e} on a grid without Dirichlet edges")]
    Compatibility { mean: f64 },

    #[error("iteration limit reached after {iterations} iterations (residual {residual:e})")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("time step {dt:e} violates the CFL bound; admissible dt is {admissible:e}")]
    Cfl { dt: f64, admissible: f64 },

    #[error("finite-difference step did not converge: |Phi(eps) - Phi(eps/2)| = {difference:e} (norms {norm_eps:e}, {norm_half:e})")]
    EpsilonNonconvergence {
        difference: f64,
        norm_eps: f64,
        norm_half: f64,
    },

    #[error("Volterra iteration did not converge after {iterations} sweeps (last update {update:e}, contraction estimate {contraction:.3})")]
    Volterra {
        iterations: usize,
        update: f64,
        contraction: f64,
    },

    #[error("geodesic integration failed: {0}")]
    Geodesic(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
