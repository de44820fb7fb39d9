//! Beat-to-beat delineation of impedance cardiography (ICG) signals.
//!
//! The crate locates the four characteristic points of each cardiac cycle in
//! the dZ/dt waveform — B (aortic valve opening), C (maximal systolic flow),
//! X (aortic valve closing) and O (mitral opening) — using only the ICG
//! channel, and derives per-beat hemodynamic parameters from them.
//!
//! # Processing stages
//!
//! * [`sgfilter`] — Savitzky-Golay smoothing with an SNR-driven adaptive
//!   choice of the filter length.
//! * [`cdetect`] — C-peak detection through relative-energy enhancement and
//!   dual-threshold active regions.
//! * [`bxo`] — B-point search left of each C peak, and joint X–O selection
//!   right of it.
//! * [`hemo`] — per-beat hemodynamic parameters (heart rate, LVET, IVRT,
//!   B–C amplitude).
//! * [`pipeline`] — windowed end-to-end delineation of whole records.
//! * [`eval`] — tolerance-based scoring against reference annotations,
//!   parameter calibration, and filter-length sweeps.
//! * [`synth`] — synthetic ICG generator with exact ground-truth annotations.
//!
//! # Example
//!
//! ```
//! use icg_core::{pipeline, synth, DelineationParams};
//!
//! // Ten seconds of clean synthetic ICG at 250 Hz.
//! let spec = synth::SyntheticBeatSpec::default();
//! let record = synth::generate(&spec, 10.0, 250.0, 7).unwrap();
//!
//! let params = DelineationParams::default();
//! let beats = pipeline::run_pipeline(&record.signal, &params).unwrap();
//! assert!(!beats.is_empty());
//! for beat in &beats {
//!     // Every beat carries at least its C peak.
//!     assert!(beat.c.unwrap() < record.signal.len());
//! }
//! ```

pub mod bxo;
pub mod cdetect;
pub mod error;
pub mod eval;
pub mod hemo;
pub mod pipeline;
pub mod sgfilter;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
pub use signal::{
    ms_to_samples, samples_to_ms, BeatAnnotation, DelineationParams, Signal, WindowSegment,
};
