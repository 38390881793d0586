use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chief orbit: {0}")]
    InvalidOrbit(String),

    #[error("Kepler equation did not converge after {iterations} iterations (M = {mean_anomaly})")]
    KeplerNonConvergence { mean_anomaly: f64, iterations: usize },

    #[error("integration failed at {at}: {reason}")]
    IntegrationFailure { at: f64, reason: String },

    #[error("matrix is near-singular (condition number {condition:.3e})")]
    NearSingular { condition: f64 },

    #[error(
        "singular configuration: {what}; evaluate with epsilon regularization or choose f0 != k*pi"
    )]
    SingularConfiguration { what: String },

    #[error("inclination singularity: |sin i| = {sin_i:.3e} with nonzero normal acceleration")]
    InclinationSingularity { sin_i: f64 },

    #[error("relative position direction undefined (zero total radius)")]
    UndefinedDirection,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigenvalue {re:.6e}{im:+.6e}i on the closed negative real axis; integrate over twice the period")]
    NegativeRealEigenvalue { re: f64, im: f64 },

    #[error("matrix logarithm did not converge: {0}")]
    LogNonConvergence(String),

    #[error("underdetermined Fourier fit: {samples} samples for {harmonics} harmonics")]
    Underdetermined { samples: usize, harmonics: usize },

    #[error("plant is not periodic enough: residual {residual:.3e} exceeds threshold {threshold:.3e}")]
    Aperiodic { residual: f64, threshold: f64 },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
