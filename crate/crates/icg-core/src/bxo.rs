//! B-point and X–O detection around each C peak.
//!
//! The B point (aortic valve opening) is searched left of C inside a short
//! window: scanning from the half-amplitude bound back toward the window
//! start, the first local minimum or sufficiently sharp slope wins, with a
//! gentler slope threshold on a second pass and the window minimum as the
//! final fallback.
//!
//! The X point (aortic valve closing) and O point (mitral opening) are
//! picked jointly right of C: every local-minimum/local-maximum pair from
//! their respective search windows is screened against spacing, intervening
//! ripple and position constraints, and the feasible pair with the largest
//! amplitude swing is kept. Absence of a feasible pair is a normal outcome.

use crate::cdetect::{is_local_max, is_local_min};
use crate::error::{Error, Result};
use crate::signal::{ms_to_samples, DelineationParams, Signal};

/// Milliseconds per slope step: slopes are expressed per 4 ms so that the
/// thresholds are sampling-rate independent.
const SLOPE_STEP_MS: f64 = 4.0;

/// First differences of the C-normalized signal, per 4 ms step.
///
/// `deriv[i]` is the slope between samples `i` and `i + 1` of the signal
/// scaled so the C amplitude is 1, expressed per 4 ms. Both normalizations
/// make the slope thresholds independent of gain and sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeTrace {
    /// One entry per adjacent sample pair (`signal.len() - 1` entries).
    pub deriv: Vec<f64>,
}

impl SlopeTrace {
    /// Builds the trace for `signal` with the C amplitude `c_ampl`.
    ///
    /// A non-positive `c_ampl` disables amplitude normalization (the beat is
    /// degenerate anyway; slopes then stay in raw units).
    pub fn new(signal: &Signal, c_ampl: f64) -> Self {
        let scale = if c_ampl > 0.0 { c_ampl } else { 1.0 };
        let per_step = SLOPE_STEP_MS / 1000.0 * signal.fs;
        let deriv = signal
            .samples
            .windows(2)
            .map(|w| (w[1] - w[0]) * per_step / scale)
            .collect();
        SlopeTrace { deriv }
    }
}

/// Locates the B point left of the C peak at `c_pos` (amplitude `c_ampl`).
///
/// The search window is `[c_pos - b_window, b_lim_r]`, where `b_lim_r` is
/// the sample closest to C whose value has dropped to `a_frac * c_ampl` (the
/// window start when no such sample exists). Scanning right-to-left and
/// excluding the left bound:
///
/// 1. the first local minimum, or first `|slope| > b_slope1`, wins;
/// 2. failing that, the first signed `slope > b_slope2` wins;
/// 3. failing that, the position of the window minimum is returned
///    (leftmost on ties).
///
/// # Errors
///
/// [`Error::WindowOutOfRange`] when the window would start before sample 0.
/// Callers delineating whole records guarantee this cannot happen for beats
/// with a complete left context.
pub fn detect_b(
    signal: &Signal,
    c_pos: usize,
    c_ampl: f64,
    params: &DelineationParams,
) -> Result<usize> {
    let window = ms_to_samples(params.b_window_ms, signal.fs);
    if c_pos < window {
        return Err(Error::WindowOutOfRange { c_pos, window });
    }
    let samples = &signal.samples;
    let b_lim_l = c_pos - window;
    let threshold = params.a_frac * c_ampl;
    let b_lim_r = (b_lim_l..c_pos)
        .rev()
        .find(|&i| samples[i] <= threshold)
        .unwrap_or(b_lim_l);

    let trace = SlopeTrace::new(signal, c_ampl);
    // First pass: local minimum or sharp slope of either sign.
    for i in ((b_lim_l + 1)..=b_lim_r).rev() {
        if is_local_min(samples, i) || trace.deriv[i].abs() > params.b_slope1 {
            return Ok(i);
        }
    }
    // Second pass: gentler, upward-only slope criterion.
    for i in ((b_lim_l + 1)..=b_lim_r).rev() {
        if trace.deriv[i] > params.b_slope2 {
            return Ok(i);
        }
    }
    // Fallback: window minimum, leftmost on ties.
    let mut best = b_lim_l;
    for i in b_lim_l..=b_lim_r {
        if samples[i] < samples[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Jointly locates the X and O points right of the C peak at `c_pos`.
///
/// X candidates are local minima in `[c_pos + cx_min, c_pos + cx_max]`; O
/// candidates are local maxima in `[c_pos + co_min, c_pos + co_max]` (both
/// windows clipped to the signal). A pair `(x, o)` is feasible when:
///
/// * the O value exceeds the X value,
/// * the X-to-O spacing lies within `[xo_min_ms, xo_max_ms]`,
/// * fewer than `xo_max_minima` local minima lie strictly between them,
/// * O falls inside the first half of the C-C interval — bounded by
///   `next_c` when the following C is known, otherwise by half the mean of
///   the recent C-C intervals (`prior_cc_mean_s`); with neither available
///   the constraint is waived.
///
/// Among feasible pairs the one with the largest `signal[o] - signal[x]`
/// swing wins (first found on exact ties). `None` — no feasible pair — is a
/// valid outcome, not an error.
pub fn detect_xo(
    signal: &Signal,
    c_pos: usize,
    params: &DelineationParams,
    next_c: Option<usize>,
    prior_cc_mean_s: Option<f64>,
) -> Option<(usize, usize)> {
    let samples = &signal.samples;
    let n = samples.len();
    if n == 0 {
        return None;
    }
    let clip = |idx: usize| idx.min(n - 1);
    let x_lo = clip(c_pos + ms_to_samples(params.cx_min_ms, signal.fs));
    let x_hi = clip(c_pos + ms_to_samples(params.cx_max_ms, signal.fs));
    let o_lo = clip(c_pos + ms_to_samples(params.co_min_ms, signal.fs));
    let o_hi = clip(c_pos + ms_to_samples(params.co_max_ms, signal.fs));

    let x_candidates: Vec<usize> = (x_lo..=x_hi).filter(|&i| is_local_min(samples, i)).collect();
    let o_candidates: Vec<usize> = (o_lo..=o_hi).filter(|&i| is_local_max(samples, i)).collect();
    if x_candidates.is_empty() || o_candidates.is_empty() {
        return None;
    }

    // O must sit in the first half of the beat-to-beat interval.
    let half_limit_samples: Option<f64> = match (next_c, prior_cc_mean_s) {
        (Some(next), _) if next > c_pos => Some((next - c_pos) as f64 / 2.0),
        (_, Some(mean_s)) => Some(0.5 * mean_s * signal.fs),
        _ => None,
    };

    let mut best: Option<(usize, usize, f64)> = None;
    for &x in &x_candidates {
        for &o in &o_candidates {
            if o <= x || samples[o] <= samples[x] {
                continue;
            }
            let gap_ms = (o - x) as f64 * 1000.0 / signal.fs;
            if gap_ms < params.xo_min_ms || gap_ms > params.xo_max_ms {
                continue;
            }
            let ripple = (x + 1..o).filter(|&j| is_local_min(samples, j)).count();
            if ripple >= params.xo_max_minima {
                continue;
            }
            if let Some(limit) = half_limit_samples {
                if (o - c_pos) as f64 > limit {
                    continue;
                }
            }
            let swing = samples[o] - samples[x];
            if best.map_or(true, |(_, _, s)| swing > s) {
                best = Some((x, o, swing));
            }
        }
    }
    best.map(|(x, o, _)| (x, o))
}
