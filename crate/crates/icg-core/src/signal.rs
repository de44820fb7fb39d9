//! Shared signal types, beat annotations and tunable parameters.
//!
//! Every duration-like tunable is kept in physical units (milliseconds,
//! seconds, Hz) and converted to sample counts at the point of use, so the
//! same parameter set works at any sampling rate.

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Unit conversions
// ---------------------------------------------------------------------------

/// Converts a duration in milliseconds to a sample count at rate `fs`,
/// rounding to the nearest sample (`f64::round`, ties away from zero).
///
/// ```
/// use icg_core::ms_to_samples;
/// assert_eq!(ms_to_samples(80.0, 250.0), 20);
/// assert_eq!(ms_to_samples(950.0, 128.0), 122); // 121.6 rounds up
/// ```
pub fn ms_to_samples(ms: f64, fs: f64) -> usize {
    debug_assert!(ms >= 0.0 && fs > 0.0);
    (ms * fs / 1000.0).round() as usize
}

/// Converts a sample count back to milliseconds at rate `fs`.
pub fn samples_to_ms(samples: usize, fs: f64) -> f64 {
    debug_assert!(fs > 0.0);
    samples as f64 * 1000.0 / fs
}

// ---------------------------------------------------------------------------
// Signal and windows
// ---------------------------------------------------------------------------

/// A uniformly sampled single-channel signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    /// Sample values in acquisition order.
    pub samples: Vec<f64>,
    /// Sampling rate in Hz, strictly positive.
    pub fs: f64,
}

impl Signal {
    /// Wraps raw samples taken at `fs` Hz.
    ///
    /// # Panics
    ///
    /// Panics if `fs` is not strictly positive and finite.
    pub fn new(samples: Vec<f64>, fs: f64) -> Self {
        assert!(fs.is_finite() && fs > 0.0, "sampling rate must be positive, got {fs}");
        Signal { samples, fs }
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// True when the signal holds no samples.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Total duration in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }
}

/// A half-open window `[start, start + len)` into a record, in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSegment {
    /// First sample index of the window.
    pub start: usize,
    /// Window length in samples.
    pub len: usize,
}

impl WindowSegment {
    /// One past the last sample index.
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

// ---------------------------------------------------------------------------
// Beat annotations
// ---------------------------------------------------------------------------

/// Characteristic points of one cardiac cycle, as sample indices into the
/// record the annotation refers to.
///
/// Any point may be absent — a detector can legitimately fail to find it, and
/// reference annotations may leave it unmarked. When present, indices satisfy
/// `b < c < x < o`. Amplitudes mirror the indices: `amp_*` is the value of
/// the annotated signal at the corresponding index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BeatAnnotation {
    /// B point: onset of the rapid systolic upstroke (aortic valve opening).
    pub b: Option<usize>,
    /// C point: peak of the systolic wave (maximal aortic flow).
    pub c: Option<usize>,
    /// X point: trough after C (aortic valve closing).
    pub x: Option<usize>,
    /// O point: diastolic peak after X (mitral opening).
    pub o: Option<usize>,
    /// Signal value at `b`.
    pub amp_b: Option<f64>,
    /// Signal value at `c`.
    pub amp_c: Option<f64>,
    /// Signal value at `x`.
    pub amp_x: Option<f64>,
    /// Signal value at `o`.
    pub amp_o: Option<f64>,
}

impl BeatAnnotation {
    /// True when the present indices are strictly ordered `b < c < x < o`.
    pub fn is_ordered(&self) -> bool {
        let seq = [self.b, self.c, self.x, self.o];
        let mut prev: Option<usize> = None;
        for idx in seq.into_iter().flatten() {
            if let Some(p) = prev {
                if idx <= p {
                    return false;
                }
            }
            prev = Some(idx);
        }
        true
    }

    /// Copies amplitudes from `signal` for every present index.
    pub fn fill_amplitudes(&mut self, signal: &Signal) {
        self.amp_b = self.b.map(|i| signal.samples[i]);
        self.amp_c = self.c.map(|i| signal.samples[i]);
        self.amp_x = self.x.map(|i| signal.samples[i]);
        self.amp_o = self.o.map(|i| signal.samples[i]);
    }

    /// Number of present point indices (0–4).
    pub fn points_filled(&self) -> usize {
        [self.b, self.c, self.x, self.o].iter().filter(|p| p.is_some()).count()
    }
}

// ---------------------------------------------------------------------------
// Tunable parameters
// ---------------------------------------------------------------------------

/// Every tunable constant of the delineation stages, in physical units.
///
/// `Default` yields the reference configuration the detectors were designed
/// around; [`DelineationParams::validate`] checks internal consistency after
/// edits. Fields can also be addressed by name through
/// [`DelineationParams::set_field`], which is what configuration files and
/// calibration grids use.
#[derive(Debug, Clone, PartialEq)]
pub struct DelineationParams {
    /// SNR (2-norm ratio of sub- vs super-cutoff band) above which the
    /// adaptive filter stops lengthening.
    pub snr_thr: f64,
    /// Minimum relative SNR improvement per length step to keep going.
    pub snr_impr_thr: f64,
    /// Band split frequency for the SNR estimate, Hz.
    pub snr_cutoff_hz: f64,
    /// Savitzky-Golay polynomial order.
    pub sg_order: usize,
    /// First filter length tried (odd).
    pub sg_len_start: usize,
    /// Length increment between tries (even, keeps lengths odd).
    pub sg_len_step: usize,
    /// Largest filter length tried (odd).
    pub sg_len_max: usize,
    /// Long (background) energy window for C-peak enhancement, ms.
    pub relen_long_ms: f64,
    /// Short (foreground) energy window for C-peak enhancement, ms.
    pub relen_short_ms: f64,
    /// Upper activation threshold as a fraction of the normalization peak.
    pub thr_max_frac: f64,
    /// Lower deactivation threshold as a fraction of the normalization peak.
    pub thr_min_frac: f64,
    /// Candidate C peaks closer than this are merged (higher one kept), s.
    pub merge_interval_s: f64,
    /// Significance multiple of mean |enhanced signal| the second-highest
    /// enhanced peak must exceed to define the normalization amplitude.
    pub peak_significance_factor: f64,
    /// A new C is rejected when its distance to the previous accepted C is
    /// below mean(recent C-C intervals) / this factor.
    pub cc_valid_factor: f64,
    /// Number of recent C-C intervals kept for the validity check.
    pub cc_history: usize,
    /// Width of the B search window left of C, ms.
    pub b_window_ms: f64,
    /// Fraction of the C amplitude bounding the B search on the right.
    pub a_frac: f64,
    /// First-pass slope threshold (|slope| per 4 ms, C-normalized).
    pub b_slope1: f64,
    /// Second-pass slope threshold (signed slope per 4 ms, C-normalized).
    pub b_slope2: f64,
    /// O search window after C: lower bound, ms.
    pub co_min_ms: f64,
    /// O search window after C: upper bound, ms.
    pub co_max_ms: f64,
    /// X search window after C: lower bound, ms.
    pub cx_min_ms: f64,
    /// X search window after C: upper bound, ms.
    pub cx_max_ms: f64,
    /// Minimum X-to-O spacing, ms.
    pub xo_min_ms: f64,
    /// Maximum X-to-O spacing, ms.
    pub xo_max_ms: f64,
    /// An X–O pair is infeasible when this many (or more) local minima lie
    /// strictly between the two points.
    pub xo_max_minima: usize,
}

impl Default for DelineationParams {
    fn default() -> Self {
        DelineationParams {
            snr_thr: 30.0,
            snr_impr_thr: 0.01,
            snr_cutoff_hz: 20.0,
            sg_order: 3,
            sg_len_start: 3,
            sg_len_step: 2,
            sg_len_max: 31,
            relen_long_ms: 950.0,
            relen_short_ms: 140.0,
            thr_max_frac: 0.2,
            thr_min_frac: 0.02,
            merge_interval_s: 0.25,
            peak_significance_factor: 2.0,
            cc_valid_factor: 1.7,
            cc_history: 5,
            b_window_ms: 80.0,
            a_frac: 0.5,
            b_slope1: 0.11,
            b_slope2: 0.08,
            co_min_ms: 20.0,
            co_max_ms: 40.0,
            cx_min_ms: 15.0,
            cx_max_ms: 30.0,
            xo_min_ms: 2.0,
            xo_max_ms: 15.0,
            xo_max_minima: 3,
        }
    }
}

/// Names accepted by [`DelineationParams::set_field`], in declaration order.
pub const PARAM_FIELDS: &[&str] = &[
    "snr_thr",
    "snr_impr_thr",
    "snr_cutoff_hz",
    "sg_order",
    "sg_len_start",
    "sg_len_step",
    "sg_len_max",
    "relen_long_ms",
    "relen_short_ms",
    "thr_max_frac",
    "thr_min_frac",
    "merge_interval_s",
    "peak_significance_factor",
    "cc_valid_factor",
    "cc_history",
    "b_window_ms",
    "a_frac",
    "b_slope1",
    "b_slope2",
    "co_min_ms",
    "co_max_ms",
    "cx_min_ms",
    "cx_max_ms",
    "xo_min_ms",
    "xo_max_ms",
    "xo_max_minima",
];

impl DelineationParams {
    /// Checks internal consistency; returns the first violated rule.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if !(self.snr_thr > 0.0) {
            return fail("snr_thr must be positive");
        }
        if !(self.snr_impr_thr > 0.0) {
            return fail("snr_impr_thr must be positive");
        }
        if !(self.snr_cutoff_hz > 0.0) {
            return fail("snr_cutoff_hz must be positive");
        }
        if self.sg_order == 0 {
            return fail("sg_order must be at least 1");
        }
        if self.sg_len_start % 2 == 0 {
            return fail("sg_len_start must be odd");
        }
        if self.sg_len_step == 0 || self.sg_len_step % 2 != 0 {
            return fail("sg_len_step must be even and positive");
        }
        if self.sg_len_max % 2 == 0 || self.sg_len_max < self.sg_len_start {
            return fail("sg_len_max must be odd and at least sg_len_start");
        }
        if self.sg_len_max <= self.sg_order {
            return fail("sg_len_max must exceed sg_order");
        }
        if !(self.relen_long_ms > self.relen_short_ms && self.relen_short_ms > 0.0) {
            return fail("energy windows must satisfy 0 < relen_short_ms < relen_long_ms");
        }
        if !(self.thr_max_frac > self.thr_min_frac && self.thr_min_frac > 0.0) {
            return fail("thresholds must satisfy 0 < thr_min_frac < thr_max_frac");
        }
        if !(self.thr_max_frac < 1.0) {
            return fail("thr_max_frac must be below 1");
        }
        if !(self.merge_interval_s > 0.0) {
            return fail("merge_interval_s must be positive");
        }
        if !(self.peak_significance_factor > 0.0) {
            return fail("peak_significance_factor must be positive");
        }
        if !(self.cc_valid_factor > 0.0) {
            return fail("cc_valid_factor must be positive");
        }
        if self.cc_history == 0 {
            return fail("cc_history must be at least 1");
        }
        if !(self.b_window_ms > 0.0) {
            return fail("b_window_ms must be positive");
        }
        if !(self.a_frac > 0.0 && self.a_frac < 1.0) {
            return fail("a_frac must lie in (0, 1)");
        }
        if !(self.b_slope1 > 0.0 && self.b_slope2 > 0.0) {
            return fail("slope thresholds must be positive");
        }
        if !(self.co_min_ms > 0.0 && self.co_min_ms < self.co_max_ms) {
            return fail("O window must satisfy 0 < co_min_ms < co_max_ms");
        }
        if !(self.cx_min_ms > 0.0 && self.cx_min_ms < self.cx_max_ms) {
            return fail("X window must satisfy 0 < cx_min_ms < cx_max_ms");
        }
        if !(self.xo_min_ms > 0.0 && self.xo_min_ms < self.xo_max_ms) {
            return fail("X-O spacing must satisfy 0 < xo_min_ms < xo_max_ms");
        }
        if self.xo_max_minima == 0 {
            return fail("xo_max_minima must be at least 1");
        }
        Ok(())
    }

    /// Sets a field addressed by its name in [`PARAM_FIELDS`].
    ///
    /// Integer-valued fields require `value` to be a non-negative whole
    /// number. Unknown names and non-integral values for integer fields are
    /// rejected; consistency across fields is checked separately by
    /// [`DelineationParams::validate`].
    pub fn set_field(&mut self, name: &str, value: f64) -> Result<()> {
        let as_usize = |v: f64| -> Result<usize> {
            if v.fract() == 0.0 && v >= 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(Error::InvalidParams(format!(
                    "field {name} takes a non-negative integer, got {v}"
                )))
            }
        };
        match name {
            "snr_thr" => self.snr_thr = value,
            "snr_impr_thr" => self.snr_impr_thr = value,
            "snr_cutoff_hz" => self.snr_cutoff_hz = value,
            "sg_order" => self.sg_order = as_usize(value)?,
            "sg_len_start" => self.sg_len_start = as_usize(value)?,
            "sg_len_step" => self.sg_len_step = as_usize(value)?,
            "sg_len_max" => self.sg_len_max = as_usize(value)?,
            "relen_long_ms" => self.relen_long_ms = value,
            "relen_short_ms" => self.relen_short_ms = value,
            "thr_max_frac" => self.thr_max_frac = value,
            "thr_min_frac" => self.thr_min_frac = value,
            "merge_interval_s" => self.merge_interval_s = value,
            "peak_significance_factor" => self.peak_significance_factor = value,
            "cc_valid_factor" => self.cc_valid_factor = value,
            "cc_history" => self.cc_history = as_usize(value)?,
            "b_window_ms" => self.b_window_ms = value,
            "a_frac" => self.a_frac = value,
            "b_slope1" => self.b_slope1 = value,
            "b_slope2" => self.b_slope2 = value,
            "co_min_ms" => self.co_min_ms = value,
            "co_max_ms" => self.co_max_ms = value,
            "cx_min_ms" => self.cx_min_ms = value,
            "cx_max_ms" => self.cx_max_ms = value,
            "xo_min_ms" => self.xo_min_ms = value,
            "xo_max_ms" => self.xo_max_ms = value,
            "xo_max_minima" => self.xo_max_minima = as_usize(value)?,
            _ => {
                return Err(Error::InvalidParams(format!("unknown parameter field: {name}")));
            }
        }
        Ok(())
    }
}
