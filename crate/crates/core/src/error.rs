use alloc::string::String;

/// Errors raised by the algebra, grid, game and oracle layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),

    #[error("layer index {layer} out of range 1..={step}")]
    LayerOutOfRange { layer: usize, step: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("past extinction time: t = {t} > {t_ext}")]
    PastExtinction { t: f64, t_ext: f64 },

    #[error("no ray crossed the zero level set")]
    NoLevelCrossing,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
