//! Error type shared by all processing stages.

use std::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the delineation stages.
///
/// Conditions that are normal outcomes of a detector (an absent X–O pair, an
/// empty C-peak list on a flat window) are *not* errors; only violated
/// preconditions and infeasible configurations are.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Savitzky-Golay kernel geometry is unusable: the window length must be
    /// odd and strictly greater than the polynomial order.
    InvalidKernelGeometry { length: usize, order: usize },
    /// A stage needed more samples than the input provides.
    SignalTooShort { needed: usize, got: usize },
    /// The SNR band split requires the cutoff to lie below Nyquist.
    CutoffAboveNyquist { cutoff_hz: f64, fs: f64 },
    /// The B search window would start before the beginning of the signal.
    WindowOutOfRange { c_pos: usize, window: usize },
    /// A parameter set violates its internal consistency rules.
    InvalidParams(String),
    /// A synthetic-record specification cannot be realised at the requested
    /// rate/duration, or a planted point failed its generation-time check.
    InfeasibleSpec(String),
    /// Calibration was asked to search an empty parameter grid.
    EmptyGrid,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidKernelGeometry { length, order } => write!(
                f,
                "invalid filter geometry: length {length} must be odd and greater than order {order}"
            ),
            Error::SignalTooShort { needed, got } => {
                write!(f, "signal too short: need at least {needed} samples, got {got}")
            }
            Error::CutoffAboveNyquist { cutoff_hz, fs } => write!(
                f,
                "band cutoff {cutoff_hz} Hz must lie below Nyquist ({} Hz)",
                fs / 2.0
            ),
            Error::WindowOutOfRange { c_pos, window } => write!(
                f,
                "search window of {window} samples does not fit before C at sample {c_pos}"
            ),
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::InfeasibleSpec(msg) => write!(f, "infeasible synthetic spec: {msg}"),
            Error::EmptyGrid => write!(f, "calibration grid contains no parameter combinations"),
        }
    }
}

impl std::error::Error for Error {}
