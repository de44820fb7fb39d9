//! Windowed end-to-end delineation of whole records.
//!
//! The record is processed in 3 s windows. Each window runs the full
//! per-window chain — adaptive smoothing, relative-energy C-peak detection,
//! then a B search left and an X–O search right of every C — and the next
//! window starts at the last O point found, so consecutive windows overlap
//! by whatever tail the current one could not finish. Two fallbacks keep
//! the walk moving when a window yields no O (anchor on the last C plus
//! 0.25 s) or no C at all (advance by the full window).
//!
//! Beats detected after the last O of a window are deliberately left to the
//! next window, which sees them with full context; this keeps the emitted C
//! positions strictly increasing and unique without any cross-window
//! reconciliation. The only state threaded between windows is the recent
//! C-C interval history.

use std::collections::VecDeque;

use crate::bxo::{detect_b, detect_xo};
use crate::cdetect::{detect_c_peaks, relative_energy};
use crate::error::{Error, Result};
use crate::sgfilter::{adaptive_filter, sg_apply, sg_coefficients};
use crate::signal::{ms_to_samples, BeatAnnotation, DelineationParams, Signal};

// ---------------------------------------------------------------------------
// Window segmentation constants
// ---------------------------------------------------------------------------

/// Analysis window length, seconds.
pub const WINDOW_S: f64 = 3.0;

/// Shortest trailing window still processed, seconds. Remainders below this
/// carry too little context for the energy-based detectors.
pub const MIN_WINDOW_S: f64 = 1.0;

/// Overlap anchor when a window found C peaks but no O point: the next
/// window starts this far after the last C, seconds.
const C_FALLBACK_ADVANCE_S: f64 = 0.25;

// ---------------------------------------------------------------------------
// Filter selection
// ---------------------------------------------------------------------------

/// Which smoothing front-end each window uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    /// SNR-driven adaptive length selection per window.
    Adaptive,
    /// One fixed Savitzky-Golay length (odd) for every window; the
    /// polynomial order is clamped to `length - 1` as in the adaptive path.
    Fixed(usize),
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

/// Delineates a whole record with the adaptive filter front-end.
///
/// Returns all detected beats in time order: C positions are strictly
/// increasing and unique, and every present index set is strictly ordered
/// `b < c < x < o`. Amplitudes are read from the *raw* input signal, since
/// downstream hemodynamic parameters refer to the recorded waveform, not to
/// whatever smoothing level each window happened to select.
///
/// # Errors
///
/// [`Error::SignalTooShort`] when the record is shorter than one 3 s
/// window; parameter and kernel errors propagate from the stages.
pub fn run_pipeline(signal: &Signal, params: &DelineationParams) -> Result<Vec<BeatAnnotation>> {
    run_pipeline_with_filter(signal, params, FilterMode::Adaptive)
}

/// [`run_pipeline`] with an explicit smoothing front-end; filter-length
/// sweeps use the fixed variant.
pub fn run_pipeline_with_filter(
    signal: &Signal,
    params: &DelineationParams,
    mode: FilterMode,
) -> Result<Vec<BeatAnnotation>> {
    params.validate()?;
    let fs = signal.fs;
    let n = signal.len();
    let window_len = (WINDOW_S * fs).round() as usize;
    let min_len = (MIN_WINDOW_S * fs).round() as usize;
    if n < window_len {
        return Err(Error::SignalTooShort { needed: window_len, got: n });
    }
    let fixed_kernel = match mode {
        FilterMode::Fixed(length) => {
            Some(sg_coefficients(length, params.sg_order.min(length.saturating_sub(1)))?)
        }
        FilterMode::Adaptive => None,
    };
    let b_window = ms_to_samples(params.b_window_ms, fs);
    let c_fallback = (C_FALLBACK_ADVANCE_S * fs).round() as usize;

    let mut beats: Vec<BeatAnnotation> = Vec::new();
    let mut cc_history: VecDeque<f64> = VecDeque::new();
    let mut start = 0usize;

    while start + min_len <= n {
        let end = (start + window_len).min(n);
        let window = Signal::new(signal.samples[start..end].to_vec(), fs);
        let filtered = match &fixed_kernel {
            Some(kernel) => Signal::new(sg_apply(&window.samples, kernel)?, fs),
            None => adaptive_filter(&window, params)?.signal,
        };

        let trace = relative_energy(&filtered, params.relen_long_ms, params.relen_short_ms);
        let history: Vec<f64> = cc_history.iter().copied().collect();
        let peaks = detect_c_peaks(&filtered, &trace, params, &history);
        let prior_cc_mean = if history.is_empty() {
            None
        } else {
            Some(history.iter().sum::<f64>() / history.len() as f64)
        };
        // With a full interval history, the C-C validity rule also guards
        // the window seam: the in-window check cannot see the previously
        // emitted beat, so a window-initial candidate too close to it (an
        // O wave or a diastolic rebound at the window edge) is caught here
        // with the same gap bound, frozen per window like the in-window
        // one.
        let min_cc_gap = if history.len() >= params.cc_history {
            let mean_s = prior_cc_mean.expect("non-empty history");
            Some(ms_to_samples(mean_s / params.cc_valid_factor * 1000.0, fs))
        } else {
            None
        };

        let mut window_beats: Vec<BeatAnnotation> = Vec::new();
        for (k, &c) in peaks.positions.iter().enumerate() {
            let mut beat = BeatAnnotation { c: Some(start + c), ..Default::default() };
            // A C closer to the window start than the B search span has no
            // left context; the beat keeps its other points.
            if c >= b_window {
                if let Ok(b) = detect_b(&filtered, c, peaks.amplitudes[k], params) {
                    beat.b = Some(start + b);
                }
            }
            let next_c = peaks.positions.get(k + 1).copied();
            if let Some((x, o)) = detect_xo(&filtered, c, params, next_c, prior_cc_mean) {
                beat.x = Some(start + x);
                beat.o = Some(start + o);
            }
            window_beats.push(beat);
        }

        // O-anchored advance with the two fallbacks; every branch moves
        // strictly forward of the current start.
        let last_o = window_beats.iter().filter_map(|b| b.o).max();
        let last_c = window_beats.iter().filter_map(|b| b.c).max();
        let next_start = match (last_o, last_c) {
            (Some(o), _) => o,
            (None, Some(c)) => c + c_fallback,
            (None, None) => start + window_len,
        };
        debug_assert!(next_start > start, "window advance must make progress");

        // Beats past the next start are left to the next window, which
        // covers them with full context — unless this was the final window.
        let continuing = next_start + min_len <= n;
        if continuing {
            window_beats.retain(|b| b.c.expect("detector sets C") < next_start);
        }

        for beat in window_beats {
            let c = beat.c.expect("detector sets C");
            match beats.last_mut() {
                Some(prev) if prev.c == Some(c) => {
                    // Same beat seen twice across a window seam: keep the
                    // more completely annotated version.
                    if beat.points_filled() > prev.points_filled() {
                        *prev = beat;
                    }
                }
                Some(prev) if prev.c.expect("emitted beats carry C") > c => {
                    // A re-detection drifted before an already emitted beat;
                    // the earlier window had the fuller context, keep it.
                }
                _ => {
                    if let Some(&last_c_pos) = beats.last().and_then(|b| b.c.as_ref()) {
                        if let Some(min_gap) = min_cc_gap {
                            if c - last_c_pos < min_gap {
                                continue;
                            }
                        }
                        let interval = (c - last_c_pos) as f64 / fs;
                        cc_history.push_back(interval);
                        while cc_history.len() > params.cc_history {
                            cc_history.pop_front();
                        }
                    }
                    beats.push(beat);
                }
            }
        }

        start = next_start.max(start + 1);
    }

    for beat in &mut beats {
        beat.fill_amplitudes(signal);
    }
    debug_assert!(
        beats.windows(2).all(|w| w[0].c < w[1].c),
        "emitted C positions must be strictly increasing"
    );
    Ok(beats)
}
