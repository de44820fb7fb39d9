//! C-peak detection through relative-energy enhancement.
//!
//! The C point is the dominant systolic peak of the dZ/dt waveform. To make
//! it stand out against slower background activity, each sample is weighted
//! by the ratio of its short-window to long-window mean-square energy
//! ([`relative_energy`]); peaks of the enhanced signal then gate
//! dual-threshold active regions in which the original signal's maximum is
//! taken as a candidate C ([`detect_c_peaks`]). Candidates too close
//! together are merged, and candidates arriving implausibly early after the
//! previous beat are rejected using the recent C-C interval history.

use crate::signal::{ms_to_samples, DelineationParams, Signal};

// ---------------------------------------------------------------------------
// Relative-energy enhancement
// ---------------------------------------------------------------------------

/// Per-sample enhancement coefficients and the enhanced signal.
#[derive(Debug, Clone, PartialEq)]
pub struct RelEnTrace {
    /// Ratio of short- to long-window mean-square energy at each sample.
    pub c_coeff: Vec<f64>,
    /// Enhanced signal: `c_coeff[n] * signal[n]`.
    pub xre: Vec<f64>,
}

/// Computes the relative-energy enhancement of `signal`.
///
/// Both windows are centred on the current sample and truncated at the
/// record edges; energies are mean squares over the samples actually
/// covered, so truncation does not bias the ratio. A zero-energy long
/// window yields a zero coefficient. Runs in O(n) via a prefix sum of
/// squares.
///
/// The coefficient is a ratio of same-degree energies, so it is invariant
/// under amplitude scaling; the enhanced signal scales linearly with the
/// input, which leaves all later threshold comparisons (made relative to the
/// enhanced peaks) unchanged.
pub fn relative_energy(signal: &Signal, long_ms: f64, short_ms: f64) -> RelEnTrace {
    let n = signal.len();
    let half_long = ms_to_samples(long_ms, signal.fs) / 2;
    let half_short = ms_to_samples(short_ms, signal.fs) / 2;
    // prefix[i] = sum of squares of samples[..i]
    let mut prefix = vec![0.0f64; n + 1];
    for (i, &v) in signal.samples.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v * v;
    }
    let mean_square = |centre: usize, half: usize| -> f64 {
        let lo = centre.saturating_sub(half);
        let hi = (centre + half + 1).min(n);
        (prefix[hi] - prefix[lo]) / (hi - lo) as f64
    };
    let mut c_coeff = Vec::with_capacity(n);
    let mut xre = Vec::with_capacity(n);
    for i in 0..n {
        let long = mean_square(i, half_long);
        let coeff = if long > 0.0 { mean_square(i, half_short) / long } else { 0.0 };
        c_coeff.push(coeff);
        xre.push(coeff * signal.samples[i]);
    }
    RelEnTrace { c_coeff, xre }
}

// ---------------------------------------------------------------------------
// Extremum helpers (shared with the B/X/O stage)
// ---------------------------------------------------------------------------

/// True when `i` is a strict local maximum, or the leftmost sample of a
/// plateau flanked by strictly lower values. Signal ends never qualify.
pub(crate) fn is_local_max(samples: &[f64], i: usize) -> bool {
    let n = samples.len();
    if i == 0 || i + 1 >= n {
        return false;
    }
    let v = samples[i];
    if samples[i - 1] >= v {
        return false;
    }
    let mut j = i + 1;
    while j < n && samples[j] == v {
        j += 1;
    }
    j < n && samples[j] < v
}

/// Mirror of [`is_local_max`] for minima.
pub(crate) fn is_local_min(samples: &[f64], i: usize) -> bool {
    let n = samples.len();
    if i == 0 || i + 1 >= n {
        return false;
    }
    let v = samples[i];
    if samples[i - 1] <= v {
        return false;
    }
    let mut j = i + 1;
    while j < n && samples[j] == v {
        j += 1;
    }
    j < n && samples[j] > v
}

// ---------------------------------------------------------------------------
// C-peak detection
// ---------------------------------------------------------------------------

/// Accepted C peaks of one window, in increasing position order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CPeakList {
    /// Sample indices relative to the analysed signal.
    pub positions: Vec<usize>,
    /// Signal values at those indices.
    pub amplitudes: Vec<f64>,
}

impl CPeakList {
    /// Number of accepted peaks.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    /// True when no peak was accepted.
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Detects C peaks in a (filtered) window.
///
/// Steps, all of them threshold-relative so absolute gain cancels out:
///
/// 1. A normalization amplitude is picked from the enhanced-signal peaks
///    (peaks closer than `merge_interval_s` are suppressed into one before
///    ranking): the second-highest peak when it is significant — above
///    `peak_significance_factor` times the mean absolute enhanced signal —
///    otherwise the highest. Using the runner-up makes the normalization
///    robust against one outlier artifact dwarfing the record.
/// 2. Active regions run from an upward crossing of
///    `thr_max_frac * normalization` to the next drop below
///    `thr_min_frac * normalization`; each region contributes the position
///    of the *original* signal's maximum inside it as a candidate.
/// 3. Candidates closer than `merge_interval_s` are merged, keeping the
///    higher one.
/// 4. With a full interval history, a candidate is rejected when its
///    distance to the previously accepted candidate of this window is below
///    `mean(prior_intervals) / cc_valid_factor`. With fewer than
///    `cc_history` recorded intervals the check is skipped.
///
/// `prior_intervals` holds the most recent accepted C-C intervals in
/// seconds, oldest first; callers thread it across windows. A flat window
/// simply yields an empty list — never an error.
pub fn detect_c_peaks(
    signal: &Signal,
    trace: &RelEnTrace,
    params: &DelineationParams,
    prior_intervals: &[f64],
) -> CPeakList {
    let n = signal.len();
    let merge_gap = ms_to_samples(params.merge_interval_s * 1000.0, signal.fs);
    let Some(norm_amp) = normalization_amplitude(trace, merge_gap, params) else {
        return CPeakList::default();
    };
    let thr_max = params.thr_max_frac * norm_amp;
    let thr_min = params.thr_min_frac * norm_amp;

    // Dual-threshold active regions over the enhanced signal. A region
    // needs an upward *crossing* of the activation threshold: the window
    // edge itself never qualifies (initializing the carry to `true`), so a
    // window that opens on the decaying crest of an already-processed beat
    // does not resurrect it as a candidate at sample 0.
    let mut candidates: Vec<usize> = Vec::new();
    let mut region_start: Option<usize> = None;
    let mut above_max = true;
    for i in 0..n {
        let v = trace.xre[i];
        match region_start {
            None => {
                // Upward crossing of the activation threshold.
                if v >= thr_max && !above_max {
                    region_start = Some(i);
                }
            }
            Some(start) => {
                if v < thr_min {
                    candidates.push(argmax(&signal.samples[start..i + 1]) + start);
                    region_start = None;
                }
            }
        }
        above_max = v >= thr_max;
    }
    if let Some(start) = region_start {
        candidates.push(argmax(&signal.samples[start..n]) + start);
    }

    // Merge near-coincident candidates, keeping the higher one.
    let mut merged: Vec<usize> = Vec::new();
    for cand in candidates {
        match merged.last().copied() {
            Some(prev) if cand - prev < merge_gap => {
                if signal.samples[cand] > signal.samples[prev] {
                    *merged.last_mut().unwrap() = cand;
                }
            }
            _ => merged.push(cand),
        }
    }

    // Reject implausibly early candidates against the recent C-C history.
    let min_gap_samples = if prior_intervals.len() >= params.cc_history {
        let mean_s = prior_intervals.iter().sum::<f64>() / prior_intervals.len() as f64;
        Some(ms_to_samples(mean_s / params.cc_valid_factor * 1000.0, signal.fs))
    } else {
        None
    };
    let mut positions: Vec<usize> = Vec::new();
    for cand in merged {
        if let (Some(min_gap), Some(&prev)) = (min_gap_samples, positions.last()) {
            if cand - prev < min_gap {
                continue;
            }
        }
        positions.push(cand);
    }

    let amplitudes = positions.iter().map(|&p| signal.samples[p]).collect();
    CPeakList { positions, amplitudes }
}

/// Ranks the enhanced-signal peaks (after near-duplicate suppression) and
/// returns the normalization amplitude, or `None` when the window has no
/// usable peak.
fn normalization_amplitude(
    trace: &RelEnTrace,
    merge_gap: usize,
    params: &DelineationParams,
) -> Option<f64> {
    let xre = &trace.xre;
    let mut peaks: Vec<usize> = (0..xre.len()).filter(|&i| is_local_max(xre, i)).collect();
    // Highest-first suppression so duplicate samples of one physical peak
    // don't occupy two ranks.
    peaks.sort_by(|&a, &b| xre[b].partial_cmp(&xre[a]).expect("finite enhanced signal"));
    let mut kept: Vec<usize> = Vec::new();
    for p in peaks {
        if kept.iter().all(|&k| p.abs_diff(k) >= merge_gap) {
            kept.push(p);
        }
    }
    let highest = xre[*kept.first()?];
    let significance =
        params.peak_significance_factor * xre.iter().map(|v| v.abs()).sum::<f64>()
            / xre.len() as f64;
    match kept.get(1) {
        Some(&second) if xre[second] > significance => Some(xre[second]),
        _ => Some(highest),
    }
}

/// Index of the maximum value; the first one wins on ties.
fn argmax(samples: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in samples.iter().enumerate() {
        if v > samples[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Direct-definition evaluation of the enhancement at one sample:
    /// explicit window bounds, explicit mean squares. Used as the oracle for
    /// the prefix-sum implementation.
    fn oracle_coeff(samples: &[f64], i: usize, half_short: usize, half_long: usize) -> f64 {
        let ms = |half: usize| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(samples.len());
            samples[lo..hi].iter().map(|v| v * v).sum::<f64>() / (hi - lo) as f64
        };
        let long = ms(half_long);
        if long > 0.0 {
            ms(half_short) / long
        } else {
            0.0
        }
    }

    /// Simple beat-like train: raised-cosine bumps of the given amplitude at
    /// the given centres (samples), zero elsewhere.
    fn bump_train(n: usize, centres: &[(usize, f64)], half_width: usize) -> Vec<f64> {
        let mut out = vec![0.0f64; n];
        for &(centre, amp) in centres {
            let lo = centre.saturating_sub(half_width);
            let hi = (centre + half_width + 1).min(n);
            for i in lo..hi {
                let phase = (i as f64 - centre as f64) / half_width as f64;
                out[i] += amp * 0.5 * (1.0 + (PI * phase).cos());
            }
        }
        out
    }

    #[test]
    fn enhancement_matches_direct_definition() {
        let fs = 250.0;
        let samples = bump_train(1000, &[(200, 1.0), (450, 0.9), (700, 1.1)], 20);
        let signal = Signal::new(samples.clone(), fs);
        let trace = relative_energy(&signal, 950.0, 140.0);
        let half_long = ms_to_samples(950.0, fs) / 2;
        let half_short = ms_to_samples(140.0, fs) / 2;
        for i in (0..1000).step_by(7) {
            let want = oracle_coeff(&samples, i, half_short, half_long);
            let got = trace.c_coeff[i];
            assert!(
                (got - want).abs() < 1e-12,
                "coefficient at {i}: got {got}, direct definition {want}"
            );
            assert!((trace.xre[i] - want * samples[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_energy_long_window_gives_zero_coefficient() {
        let signal = Signal::new(vec![0.0; 600], 250.0);
        let trace = relative_energy(&signal, 950.0, 140.0);
        assert!(trace.c_coeff.iter().all(|&c| c == 0.0));
        assert!(trace.xre.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn edge_windows_are_truncated_not_padded() {
        // A constant signal has mean-square 1 in every truncated window, so
        // the coefficient must be exactly 1 everywhere including the ends.
        let signal = Signal::new(vec![1.0; 400], 250.0);
        let trace = relative_energy(&signal, 950.0, 140.0);
        for (i, &c) in trace.c_coeff.iter().enumerate() {
            assert!((c - 1.0).abs() < 1e-12, "coefficient at {i} is {c}, padding suspected");
        }
    }

    #[test]
    fn beat_train_peaks_are_found_exactly() {
        let fs = 250.0;
        let centres = [(200usize, 1.0), (450, 0.95), (700, 1.05), (950, 1.0)];
        let samples = bump_train(1200, &centres, 15);
        let signal = Signal::new(samples, fs);
        let trace = relative_energy(&signal, 950.0, 140.0);
        let peaks = detect_c_peaks(&signal, &trace, &DelineationParams::default(), &[]);
        let want: Vec<usize> = centres.iter().map(|&(c, _)| c).collect();
        assert_eq!(peaks.positions, want);
        for (i, &p) in peaks.positions.iter().enumerate() {
            assert_eq!(peaks.amplitudes[i], signal.samples[p]);
        }
    }

    #[test]
    fn candidate_positions_are_scale_invariant() {
        let fs = 250.0;
        let samples = bump_train(1200, &[(200, 1.0), (460, 0.9), (730, 1.1), (980, 0.95)], 15);
        let scaled: Vec<f64> = samples.iter().map(|v| v * 3.7).collect();
        let params = DelineationParams::default();
        let base = {
            let s = Signal::new(samples, fs);
            let t = relative_energy(&s, 950.0, 140.0);
            detect_c_peaks(&s, &t, &params, &[])
        };
        let scaled = {
            let s = Signal::new(scaled, fs);
            let t = relative_energy(&s, 950.0, 140.0);
            detect_c_peaks(&s, &t, &params, &[])
        };
        assert_eq!(base.positions, scaled.positions, "gain must not move candidates");
    }

    #[test]
    fn close_candidates_merge_keeping_higher() {
        let fs = 250.0;
        // Two bumps 120 ms apart (inside the 250 ms merge interval): only
        // the taller second one may survive.
        let samples = bump_train(1000, &[(400, 0.8), (430, 1.0), (800, 0.9)], 10);
        let signal = Signal::new(samples, fs);
        let trace = relative_energy(&signal, 950.0, 140.0);
        let peaks = detect_c_peaks(&signal, &trace, &DelineationParams::default(), &[]);
        assert_eq!(peaks.positions, vec![430, 800]);
    }

    #[test]
    fn merged_gaps_respect_the_merge_interval() {
        let fs = 250.0;
        let samples = bump_train(
            1400,
            &[(200, 1.0), (240, 0.9), (500, 0.8), (540, 1.1), (900, 1.0), (1200, 0.9)],
            10,
        );
        let signal = Signal::new(samples, fs);
        let trace = relative_energy(&signal, 950.0, 140.0);
        let params = DelineationParams::default();
        let peaks = detect_c_peaks(&signal, &trace, &params, &[]);
        let merge_gap = ms_to_samples(params.merge_interval_s * 1000.0, fs);
        for pair in peaks.positions.windows(2) {
            assert!(
                pair[1] - pair[0] >= merge_gap,
                "peaks {} and {} violate the merge interval",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn early_candidate_is_rejected_against_interval_history() {
        let fs = 250.0;
        // A beat followed 0.3 s later by a diastolic wave at 80% amplitude,
        // with an established rhythm of 0.8 s: 0.3 s < 0.8 / 1.7 = 0.47 s,
        // so the late wave must be rejected. 0.3 s is outside the merge
        // interval, so only the history check can catch it.
        let c1 = 300usize;
        let o1 = c1 + 75; // 0.3 s after the beat at 250 Hz
        let c2 = c1 + 200; // next true beat 0.8 s later
        let o2 = c2 + 75;
        let samples = bump_train(1200, &[(c1, 1.0), (o1, 0.8), (c2, 1.0), (o2, 0.8)], 10);
        let signal = Signal::new(samples, fs);
        let trace = relative_energy(&signal, 950.0, 140.0);
        let history = [0.8; 5];
        let peaks = detect_c_peaks(&signal, &trace, &DelineationParams::default(), &history);
        assert_eq!(peaks.positions, vec![c1, c2], "the 80% waves must be rejected");
    }

    #[test]
    fn history_check_is_skipped_until_full() {
        let fs = 250.0;
        let c1 = 300usize;
        let o1 = c1 + 75;
        let samples = bump_train(900, &[(c1, 1.0), (o1, 0.8)], 10);
        let signal = Signal::new(samples, fs);
        let trace = relative_energy(&signal, 950.0, 140.0);
        // Four intervals only: below the history capacity, check disabled.
        let peaks = detect_c_peaks(&signal, &trace, &DelineationParams::default(), &[0.8; 4]);
        assert_eq!(peaks.positions, vec![c1, o1], "cold start must not reject");
    }

    #[test]
    fn flat_window_yields_empty_list() {
        let signal = Signal::new(vec![0.25; 800], 250.0);
        let trace = relative_energy(&signal, 950.0, 140.0);
        let peaks = detect_c_peaks(&signal, &trace, &DelineationParams::default(), &[]);
        assert!(peaks.is_empty());
    }

    #[test]
    fn local_extrema_use_leftmost_plateau_sample() {
        let samples = [0.0, 1.0, 1.0, 1.0, 0.0, -1.0, -1.0, 0.0];
        assert!(is_local_max(&samples, 1));
        assert!(!is_local_max(&samples, 2), "plateau interior is not the representative");
        assert!(!is_local_max(&samples, 3));
        assert!(is_local_min(&samples, 5));
        assert!(!is_local_min(&samples, 6));
        // Ends never qualify.
        assert!(!is_local_max(&samples, 0));
        assert!(!is_local_min(&samples, 7));
    }
}
