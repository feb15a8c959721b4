use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse phase {0:?}; expected radians or a p*pi/q expression")]
    Phase(String),

    #[error("dimension {dim} too large for dense diagonalization (max {max}); use the time-stepping solver")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("non-exponential window: population rises by {rise:.3e} at t = {t}")]
    NonExponentialWindow { t: f64, rise: f64 },

    #[error("time {t} is not on the integration grid (step {step})")]
    OffGrid { t: f64, step: f64 },

    #[error("negative or non-finite integration horizon t_max = {0}")]
    BadHorizon(f64),

    #[error("Laplace transform evaluated at a pole (|denominator| = {0:.3e})")]
    Pole(f64),

    #[error("root finding failed for L = {legs}; best partial assignment {partial:?} (max residual {residual:.3e})")]
    RootFinding {
        legs: usize,
        partial: Vec<f64>,
        residual: f64,
    },

    #[error("no bound state at these phases")]
    NoBoundState,

    #[error("atom has not decayed yet (|eps|^2 = {0:.3e})")]
    NotDecayed(f64),

    #[error("trajectory has no field samples at site {0}")]
    MissingSnapshots(usize),

    #[error("collision model needs {needed} bins, above the limit of {limit}")]
    TooManyBins { needed: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
