use thiserror::Error;

/// Errors produced by the processing chain.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated an operation's contract.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input too short to produce a single STFT frame.
    #[error("input too short for one frame: {got} samples, need {need}")]
    EmptySpectrogram { got: usize, need: usize },

    /// A spectrogram or sub-matrix had an inconsistent shape.
    #[error("structural error: {0}")]
    Structure(String),

    /// Channels disagree on geometry; phase synchronization would be lost.
    #[error("channel synchronization error: {0}")]
    Synchronization(String),

    /// No known-good bins were available for noise floor interpolation.
    #[error("noise floor estimation failed: {0}")]
    FloorEstimationFailed(String),

    /// A sub-matrix size or alignment violated the switch-synchronous plan.
    #[error("switch plan violation: {0}")]
    PlanViolation(String),

    /// Sample index precedes the switch trigger; no antenna was connected.
    #[error("sample {sample} precedes trigger {trigger}")]
    PreTrigger { sample: u64, trigger: u64 },

    /// Reference samples were unavailable at a segment's indices.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// Array geometry cannot support an angle scan.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A scene or capture failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
