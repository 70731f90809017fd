use thiserror::Error;

/// Everything that can go wrong while building or checking a submanifold.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("stencil leaves the chart at {point:?} (step {step})")]
    OutOfDomain { point: Vec<f64>, step: f64 },

    #[error("non-finite evaluation at {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("matrix is not symmetric (max deviation {deviation:e})")]
    Asymmetric { deviation: f64 },

    #[error("metric is not positive definite (min eigenvalue {min_eig:e})")]
    DegenerateMetric { min_eig: f64 },

    #[error("map is not an immersion at {point:?}")]
    ImmersionFailure { point: Vec<f64> },

    #[error("point violates the quadric constraint (residual {residual:e})")]
    QuadricViolation { residual: f64 },

    #[error("principal curvature {kappa:e} vanishes to tolerance")]
    VanishingCurvature { kappa: f64 },

    #[error("bracket ({lo}, {hi}) has no sign change: P(lo)={p_lo:e}, P(hi)={p_hi:e}")]
    Bracketing { lo: f64, hi: f64, p_lo: f64, p_hi: f64 },

    #[error("root s={s} does not satisfy |s| > 1")]
    FilteredRoot { s: f64 },

    #[error("no root with index {index} ({available} available)")]
    MissingRoot { index: usize, available: usize },

    #[error("unsupported ambient: {0}")]
    UnsupportedAmbient(String),

    #[error("construction is inconsistent: {0}")]
    ConstructionConsistency(String),

    #[error("normal plane is not Lorentzian (determinant {det:e})")]
    FrameError { det: f64 },

    #[error("induced metric is not spacelike (min eigenvalue {min_eig:e})")]
    SpacelikeViolation { min_eig: f64 },

    #[error("point is excluded from the chart")]
    Excluded,

    #[error("root field jumps from {from} to {to} between neighbouring samples")]
    ThreadBreak { from: f64, to: f64 },

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("parameter constraint violated: {0}")]
    ParamConstraint(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{stage} failed at {point:?}: {source}")]
    Pipeline {
        stage: &'static str,
        point: Vec<f64>,
        #[source]
        source: Box<GeomError>,
    },
}

impl GeomError {
    pub fn at(self, stage: &'static str, point: &[f64]) -> Self {
        GeomError::Pipeline {
            stage,
            point: point.to_vec(),
            source: Box::new(self),
        }
    }

    /// Strips pipeline context.
    pub fn root_cause(&self) -> &GeomError {
        match self {
            GeomError::Pipeline { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
