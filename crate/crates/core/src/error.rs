use thiserror::Error;

/// Errors produced by the algorithmic core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("matrix dimensions must be at least 1x1, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("sampling steps must be positive (dt={dt}, dx={dx})")]
    BadSampling { dt: f64, dx: f64 },
    #[error("non-finite amplitude at row {row}, col {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("window [{start}, {end}) out of bounds for extent {extent}")]
    WindowOutOfBounds {
        start: usize,
        end: usize,
        extent: usize,
    },
    #[error("decimation factor must be >= 1")]
    BadDecimation,
    #[error("degenerate range: matrix is constant, cannot normalize")]
    DegenerateRange,
    #[error("singular evaluation point (r = 0)")]
    SingularPoint,
    #[error("invalid medium: shear modulus {shear_modulus} Pa, Poisson ratio {poisson}")]
    BadMedium { shear_modulus: f64, poisson: f64 },
    #[error("invalid fiber layout")]
    BadFiberLayout,
    #[error("invalid vehicle spec: {reason}")]
    BadVehicleSpec { reason: &'static str },
    #[error("invalid scene: {reason}")]
    BadScene { reason: &'static str },
    #[error("unknown wavelet family")]
    UnknownWavelet,
    #[error("invalid denoise config: {reason}")]
    BadDenoiseConfig { reason: &'static str },
    #[error("column of {len} samples too short for {levels} decomposition levels")]
    SignalTooShort { len: usize, levels: usize },
    #[error("shape mismatch: {rows_a}x{cols_a} vs {rows_b}x{cols_b}")]
    ShapeMismatch {
        rows_a: usize,
        cols_a: usize,
        rows_b: usize,
        cols_b: usize,
    },
    #[error("normalized cutoff frequency {wn} outside (0, 1)")]
    BadCutoff { wn: f64 },
    #[error("filter order must be >= 1")]
    BadFilterOrder,
    #[error("signal of {len} samples too short, need at least {min}")]
    SignalTooShortForFilter { len: usize, min: usize },
    #[error("column index {col} out of range for {cols} columns")]
    ColumnOutOfRange { col: usize, cols: usize },
    #[error("row index {row} out of range for {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("need at least {need} points for order-{order} fit, got {got}")]
    TooFewPoints {
        need: usize,
        order: usize,
        got: usize,
    },
    #[error("rank-deficient fit (duplicate abscissae)")]
    RankDeficientFit,
    #[error("empty search window at row {row} (trajectory exit)")]
    EmptyWindow { row: usize },
    #[error("invalid track config: {reason}")]
    BadTrackConfig { reason: &'static str },
    #[error("zero crossing speed for vehicle {vehicle_id}: harmonic mean undefined")]
    ZeroSpeed { vehicle_id: usize },
    #[error("invalid query: {reason}")]
    BadQuery { reason: &'static str },
    #[error("accumulator needs at least 2 bins per axis")]
    DegenerateBins,
}

pub type CoreResult<T> = core::result::Result<T, CoreError>;
