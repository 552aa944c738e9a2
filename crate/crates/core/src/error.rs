use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("gain or lossless-uncoupled ring: Q undefined (a_rt*tau = {0})")]
    UndefinedQ(f64),

    #[error("infinite Q: {0} is zero")]
    InfiniteQ(&'static str),

    #[error("no biphoton amplitude: matrix is identically zero")]
    NoAmplitude,

    #[error("empty pass-band: filter window contains no grid points")]
    EmptyPassband,

    #[error("{kind} profile needs at least {min} rings, got {got}")]
    TooFewRings { kind: &'static str, min: usize, got: usize },

    #[error("singular system at omega = {omega:e} rad/s")]
    Singular { omega: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    Quadrature { estimate: f64, error: f64, evaluations: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
