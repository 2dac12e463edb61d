use std::path::PathBuf;

/// Errors produced by the numerical core and the sweep/CLI layer.
///
/// Numeric payloads are stored as `f64` so the type stays independent of
/// the scalar parameter.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{quantity} is outside its domain: {value}")]
    Domain { quantity: &'static str, value: f64 },

    #[error("energy {energy} eV is at or above the barrier height {barrier} eV; use the complex continuation")]
    PropagatingBarrier { energy: f64, barrier: f64 },

    #[error("invalid unit cell: {0}")]
    InvalidCell(String),

    #[error("band {band} not found in scan window [{e_min}, {e_max}] eV")]
    BandNotFound { band: usize, e_min: f64, e_max: f64 },

    #[error("band {band} is truncated by the scan window [{e_min}, {e_max}] eV")]
    BandTruncated { band: usize, e_min: f64, e_max: f64 },

    #[error("energy {energy} eV lies outside band {band} [{e_low}, {e_high}] eV")]
    OutOfBand {
        energy: f64,
        band: usize,
        e_low: f64,
        e_high: f64,
    },

    #[error("singular point at E = {energy} eV: {reason}")]
    Singular { energy: f64, reason: &'static str },

    #[error("found only part of the resonances of band {band} for n = {periods}; missing j = {missing:?}")]
    PartialResonances {
        band: usize,
        periods: usize,
        missing: Vec<usize>,
    },

    #[error("root solver failed: {0}")]
    RootNotBracketed(String),

    #[error("Bloch decomposition degenerates at E = {energy} eV (1 - |alpha|^2 = {gap:e})")]
    DegenerateDecomposition { energy: f64, gap: f64 },

    #[error("state at E = {energy} eV is off resonance (|1 - T| = {deviation:e})")]
    OffResonance { energy: f64, deviation: f64 },

    #[error("finite-difference step {step} eV is not usable at E = {energy} eV")]
    StepUnderflow { energy: f64, step: f64 },

    #[error("unknown resonance j = {requested}; available j: 1..{available}")]
    UnknownLevel { requested: usize, available: usize },

    #[error("config file not found: {}", .0.display())]
    ConfigNotFound(PathBuf),

    #[error("failed to parse config {}: {source}", .path.display())]
    ConfigParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid config field `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
