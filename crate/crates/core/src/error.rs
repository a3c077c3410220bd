use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "|{x} - {y}| is below the pair floor {floor}; use the derivative for the y -> x limit"
    )]
    PairTooClose { x: f64, y: f64, floor: f64 },

    #[error("{name} = {value} lies outside [0, 1]")]
    OutOfDomain { name: &'static str, value: f64 },

    #[error("modulus argument must be nonnegative, got {0}")]
    NegativeDelta(f64),

    #[error("basis index k = {k} out of range 0..={n}")]
    BasisIndex { n: usize, k: usize },

    #[error("degree n = {n} outside the supported range 1..={max}")]
    Degree { n: usize, max: usize },

    #[error("no closed-form moment for e_{0}; only j = 0, 1, 2 are available")]
    MomentOrder(u32),

    #[error("quadrature order must be at least 1")]
    QuadratureOrder,

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("tau_check must be nonnegative and finite, got {0}")]
    Tau(f64),

    #[error("unknown corpus function `{0}`")]
    UnknownFunction(String),

    #[error("rate fit needs at least 3 positive values, got {0}")]
    TooFewPoints(usize),

    #[error("rate fit needs n values spanning two octaves, got {min}..={max}")]
    NarrowRange { min: usize, max: usize },

    #[error("sweep needs at least 4 ascending n values")]
    SweepList,
}
