use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spec field `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("flux through the torus is {flux_quanta} flux quanta ({sector}), must be an integer")]
    FluxNotQuantized { sector: &'static str, flux_quanta: f64 },

    #[error("position operator undefined on torus")]
    PositionOnTorus,

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("operator is not self-adjoint (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("block dimension {dim} exceeds dense cutoff {cutoff} and partial mode is disabled")]
    DimensionTooLarge { dim: usize, cutoff: usize },

    #[error("detect_gap: E_F inside spectrum (E_F = {fermi}, eigenvalue {eigenvalue:.12e})")]
    FermiInSpectrum { fermi: f64, eigenvalue: f64 },

    #[error("E_F = {fermi} lies above the computed part of the spectrum (complete up to {computed_up_to})")]
    FermiAboveComputed { fermi: f64, computed_up_to: f64 },

    #[error("degenerate gap: {0}")]
    DegenerateGap(String),

    #[error("contour invalid: {0}")]
    InvalidContour(String),

    #[error("resolvent refused: w = {w} is within {distance:.3e} of the spectrum")]
    SingularResolvent { w: crate::c64, distance: f64 },

    #[error("window invalid: {0}")]
    InvalidWindow(String),

    #[error("operator does not commute with S^z (residual {residual:.3e})")]
    SpinNotConserved { residual: f64 },

    #[error("time-reversal check requires B1 = B2 = 0 (got B1 = {b1}, B2 = {b2})")]
    NonZeroField { b1: f64, b2: f64 },

    #[error("translation {n:?} is incommensurate with the torus")]
    IncommensurateTranslation { n: (i64, i64) },

    #[error("invalid Kubo parameters: {0}")]
    InvalidKubo(String),

    #[error("gap closes at B = {endpoint}: {reason}")]
    GapClosed { endpoint: f64, reason: String },

    #[error("full spectrum required: {0}")]
    IncompleteSpectrum(String),

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{}", stage_message(stage, source))]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// `stage: message`, without repeating a stage the message already names.
fn stage_message(stage: &str, source: &Error) -> String {
    let msg = source.to_string();
    if msg.starts_with(stage) && msg[stage.len()..].starts_with(':') {
        msg
    } else {
        format!("{stage}: {msg}")
    }
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Innermost error, skipping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// Chain of stage labels from outermost to innermost.
    pub fn stages(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Error::Stage { stage, source } = cur {
            out.push(*stage);
            cur = source;
        }
        out
    }
}

pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
