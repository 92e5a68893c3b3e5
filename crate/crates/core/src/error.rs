use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coincident points: kernel is singular at x = y = ({x}, {y})")]
    CoincidentPoints { x: f64, y: f64 },

    #[error("zero argument passed to a Hankel function")]
    ZeroArgument,

    #[error("Hankel function argument {re}+{im}i lies outside the closed upper half-plane")]
    LowerHalfPlane { re: f64, im: f64 },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("absorption parameter must be positive, got {0}")]
    NonPositiveEps(f64),

    #[error("invalid wave number: {0}")]
    InvalidWaveNumber(String),

    #[error("invalid spectral shift: {0}")]
    InvalidShift(String),

    #[error("ellipticity violated at ({x}, {y}): smallest eigenvalue {eig}")]
    Ellipticity { x: f64, y: f64, eig: f64 },

    #[error("coefficient matrix is not symmetric at ({x}, {y}): |a12 - a21| = {gap}")]
    Asymmetry { x: f64, y: f64, gap: f64 },

    #[error("coefficient differs from identity outside the perturbation radius at ({x}, {y}): deviation {gap}")]
    NonIdentityTail { x: f64, y: f64, gap: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("singular stencil at node {node}: diagonal entry vanishes")]
    SingularStencil { node: usize },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("solver breakdown after restart at iteration {iteration}")]
    Breakdown { iteration: usize },

    #[error("convolution oracle requires identity coefficients; problem has a non-identity field")]
    OracleMisuse,

    #[error("trace radius {radius} too large for grid half-width {half_width} (spacing {h})")]
    RadiusTooLarge { radius: f64, half_width: f64, h: f64 },

    #[error("evaluation point at |x| = {r} is not outside the trace circle of radius {radius}")]
    PointInside { r: f64, radius: f64 },

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("weight exponent b must exceed 1, got {0}")]
    WeightExponent(f64),

    #[error("field vanishes on the fit window; no decay fit possible")]
    VanishingField,

    #[error("invalid fit window: {0}")]
    InvalidWindow(String),

    #[error("grid mismatch between fields in a ladder")]
    GridMismatch,

    #[error("invalid ladder: {0}")]
    InvalidLadder(String),

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver failure at {param}: {source}")]
    Study {
        param: String,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach the study parameter at which a failure happened.
    pub fn at(self, param: impl Into<String>) -> Error {
        Error::Study {
            param: param.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by the study configuration or problem choice.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::UnknownProblem(_)
                | Error::InvalidLadder(_)
                | Error::InvalidGrid(_)
                | Error::InvalidShift(_)
                | Error::WeightExponent(_)
                | Error::NonPositiveEps(_)
                | Error::InvalidWaveNumber(_)
        )
    }

    /// True for failures raised by the linear solver or kernel evaluation
    /// rather than by bad input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::NoConvergence { .. } | Error::Breakdown { .. } | Error::SingularStencil { .. } => {
                true
            }
            Error::Study { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}
