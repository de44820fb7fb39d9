//! Synthetic ICG records with exact ground-truth annotations.
//!
//! Each beat is assembled from piecewise raised-cosine and linear segments
//! whose anchor points land exactly on samples, so every planted B/C/X/O
//! index is an analytically known feature of the waveform. A generation-time
//! self-check verifies that each planted point really is the kind of feature
//! its morphology promises (strict extremum, slope break, ...) before any
//! noise is applied; an impossible combination of rate, heart rate and
//! offsets is reported as an error instead of producing a record that lies
//! about its own annotations.
//!
//! # Template spectral budget
//!
//! The delineation pipeline smooths each window until its band-ratio SNR
//! clears a target, so a clean record must keep almost all of its energy
//! below the band cutoff or its own fine structure (the X-O excursion in
//! particular) is filtered away before delineation. Two template choices
//! follow from that constraint and are deliberate, not cosmetic:
//!
//! * The X trough is shallow: the C-to-X drop is only ~0.35 of the C
//!   amplitude, with the rest of the downstroke carried by the slow
//!   after-O tail. A full-amplitude drop inside the ≤30 ms X search window
//!   would concentrate energy right above a 20 Hz cutoff and force long
//!   smoothing lengths that erase the X-O pair.
//! * Noise-free windows are spectrally quiet only when the window length is
//!   an integer number of beat periods; otherwise the discrete spectrum
//!   sees a large start/end discontinuity whose leakage lands in the high
//!   band. Heart rates that are multiples of 20 bpm (60, 80, 100, ...) keep
//!   every 3 s window alignment-free, and records begin mid-rhythm (the
//!   first beat starts at sample 0) so the head of the record is consistent
//!   with the periodic extension.
//!
//! Morphologies mirror the B- and X-wave variability seen in real dZ/dt
//! recordings: a clear local minimum at B, a shallow notch at B, a beat
//! whose X trough is a local but not the deepest minimum of its cycle, and
//! (beyond the three corpus shapes) a monotone upstroke where B is only a
//! slope break.

use crate::cdetect::{is_local_max, is_local_min};
use crate::error::{Error, Result};
use crate::signal::{BeatAnnotation, Signal};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

// ---------------------------------------------------------------------------
// Record description
// ---------------------------------------------------------------------------

/// Shape of the B region and of the X trough within each synthetic beat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Morphology {
    /// B is a deep, unmistakable local minimum.
    BLocalMin,
    /// B is a shallow notch (still a strict local minimum, but subtle).
    BNotch,
    /// X is a local minimum only: a deeper diastolic trough follows later
    /// in the same cycle.
    XLocalMinOnly,
    /// The upstroke is monotone; B is marked only by a slope discontinuity.
    /// The steep break ramp is spectrally loud, so this shape is meant for
    /// direct detector tests rather than the clean corpus.
    BSlopeBreak,
}

/// Additive disturbances applied after the clean record passes its
/// self-check. Amplitudes are in signal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseComponent {
    /// Gaussian white noise with the given standard deviation.
    White { sigma: f64 },
    /// A pure sinusoidal interferer.
    Sinusoid { freq_hz: f64, amp: f64 },
    /// Slow sinusoidal baseline wander.
    BaselineDrift { freq_hz: f64, amp: f64 },
}

/// Everything needed to synthesise a record: beat shape, rhythm, point
/// placements and disturbances.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticBeatSpec {
    /// Beat shape variant.
    pub morphology: Morphology,
    /// Heart rate in beats per minute.
    pub hr_bpm: f64,
    /// C-peak amplitude in signal units.
    pub c_ampl: f64,
    /// B-to-C distance, ms.
    pub b_offset_ms: f64,
    /// C-to-X distance, ms.
    pub x_offset_ms: f64,
    /// C-to-O distance, ms; must exceed `x_offset_ms`.
    pub o_offset_ms: f64,
    /// Disturbances, applied in order; empty means a clean record.
    pub noise: Vec<NoiseComponent>,
}

impl Default for SyntheticBeatSpec {
    fn default() -> Self {
        SyntheticBeatSpec {
            morphology: Morphology::BLocalMin,
            hr_bpm: 60.0,
            c_ampl: 1.0,
            b_offset_ms: 60.0,
            x_offset_ms: 28.0,
            o_offset_ms: 36.0,
            noise: Vec::new(),
        }
    }
}

/// A generated record together with the beats planted in it. Annotation
/// amplitudes are read from the final (noisy) signal, since that is the
/// signal the annotations refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRecord {
    /// The synthesised signal.
    pub signal: Signal,
    /// One annotation per planted beat, all four points present.
    pub beats: Vec<BeatAnnotation>,
}

// ---------------------------------------------------------------------------
// Template geometry (normalized to a C amplitude of 1)
// ---------------------------------------------------------------------------

/// Pre-wave rise duration, ms.
const PRE_RISE_MS: f64 = 100.0;
/// Pre-wave apex to B descent duration, ms.
const PRE_FALL_MS: f64 = 50.0;
/// O-wave settle duration back to baseline, ms (plain tails).
const SETTLE_MS: f64 = 260.0;
/// O-to-trough and trough-to-baseline durations for the deep-trough
/// morphology, ms.
const TROUGH_FALL_MS: f64 = 150.0;
const TROUGH_RISE_MS: f64 = 130.0;
/// Duration of the slope-break ramp at B (BSlopeBreak), ms.
const BREAK_MS: f64 = 8.0;
/// Duration of the gentle approach before the slope break, ms.
const APPROACH_MS: f64 = 40.0;
/// X trough value. Kept shallow: the C-to-X descent is the fastest
/// large feature of the template and bounds how much super-cutoff energy a
/// clean record carries (see the module docs).
const V_X: f64 = 0.65;
/// O crest value.
const V_O: f64 = 0.70;
/// Deep diastolic trough value (XLocalMinOnly); below baseline, so the
/// trough is a strict local minimum deeper than X.
const V_TROUGH: f64 = -0.10;
/// Values below/above the slope break (BSlopeBreak).
const V_BREAK_LO: f64 = 0.20;
const V_BREAK_HI: f64 = 0.45;

/// Time margin kept beat-free at the end of the record, seconds. Longer
/// than one 3 s analysis window, for two reasons: trailing partial windows
/// shorter than the minimum are dropped, so beats there could never be
/// delineated; and a window truncated by the record end has an arbitrary
/// length that breaks the whole-periods condition of the spectral budget,
/// so no beat should ever have to be delineated in one.
const TAIL_CLEAR_S: f64 = 3.2;

#[derive(Clone, Copy)]
enum Shape {
    /// Raised cosine: zero slope at both ends, strictly monotone between.
    Cos,
    /// Straight line: constant slope.
    Linear,
}

/// One monotone arc of the template: from `(t0_ms, v0)` to `(t1_ms, v1)`
/// with times relative to the beat's C peak and values normalized to a C
/// amplitude of 1.
struct Segment {
    t0_ms: f64,
    t1_ms: f64,
    v0: f64,
    v1: f64,
    shape: Shape,
}

fn seg(t0_ms: f64, t1_ms: f64, v0: f64, v1: f64, shape: Shape) -> Segment {
    Segment { t0_ms, t1_ms, v0, v1, shape }
}

/// Arc list of one beat for the given morphology, relative to C.
fn beat_segments(spec: &SyntheticBeatSpec) -> Vec<Segment> {
    let b = spec.b_offset_ms;
    let x = spec.x_offset_ms;
    let o = spec.o_offset_ms;
    use Shape::{Cos, Linear};
    let front: Vec<Segment> = match spec.morphology {
        Morphology::BNotch => vec![
            seg(-b - PRE_FALL_MS - PRE_RISE_MS, -b - PRE_FALL_MS, 0.0, 0.46, Cos),
            seg(-b - PRE_FALL_MS, -b, 0.46, 0.38, Cos),
            seg(-b, 0.0, 0.38, 1.0, Cos),
        ],
        Morphology::BSlopeBreak => vec![
            seg(-b - APPROACH_MS, -b, 0.0, V_BREAK_LO, Linear),
            seg(-b, -b + BREAK_MS, V_BREAK_LO, V_BREAK_HI, Linear),
            seg(-b + BREAK_MS, 0.0, V_BREAK_HI, 1.0, Linear),
        ],
        _ => vec![
            seg(-b - PRE_FALL_MS - PRE_RISE_MS, -b - PRE_FALL_MS, 0.0, 0.30, Cos),
            seg(-b - PRE_FALL_MS, -b, 0.30, 0.15, Cos),
            seg(-b, 0.0, 0.15, 1.0, Cos),
        ],
    };
    let mut segments = front;
    segments.push(seg(0.0, x, 1.0, V_X, Cos));
    segments.push(seg(x, o, V_X, V_O, Cos));
    match spec.morphology {
        Morphology::XLocalMinOnly => {
            segments.push(seg(o, o + TROUGH_FALL_MS, V_O, V_TROUGH, Cos));
            segments.push(seg(
                o + TROUGH_FALL_MS,
                o + TROUGH_FALL_MS + TROUGH_RISE_MS,
                V_TROUGH,
                0.0,
                Cos,
            ));
        }
        _ => segments.push(seg(o, o + SETTLE_MS, V_O, 0.0, Cos)),
    }
    segments
}

/// Time span of one beat around its C peak, ms: `(before, after)`.
fn beat_span_ms(spec: &SyntheticBeatSpec) -> (f64, f64) {
    let segments = beat_segments(spec);
    let before = -segments.first().expect("template is non-empty").t0_ms;
    let after = segments.last().expect("template is non-empty").t1_ms;
    (before, after)
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Synthesises `duration_s` seconds of ICG at `fs` Hz from `spec`,
/// deterministically in `seed`.
///
/// The record begins mid-rhythm: the first beat starts at sample 0, so the
/// beat-covered span is an exact tiling of whole beat periods and carries
/// no spectral seam of its own (see the module docs on the spectral
/// budget). The final 1.2 s stay beat-free (see [`TAIL_CLEAR_S`]). Every
/// planted point is verified to be a genuine feature of the clean waveform
/// before noise is added.
///
/// # Errors
///
/// [`Error::InfeasibleSpec`] when the spec is inconsistent (offsets out of
/// order, overlapping beats, negative noise magnitudes), when the duration
/// fits no beat, or when a planted feature does not survive sampling at
/// `fs` (for example a slope break too brief to exceed the slope thresholds
/// at this rate).
pub fn generate(
    spec: &SyntheticBeatSpec,
    duration_s: f64,
    fs: f64,
    seed: u64,
) -> Result<GroundTruthRecord> {
    validate_spec(spec, fs)?;
    let n = (duration_s * fs).round() as usize;
    if n == 0 {
        return Err(Error::InfeasibleSpec("duration is zero".into()));
    }
    let period_s = 60.0 / spec.hr_bpm;
    let (before_ms, after_ms) = beat_span_ms(spec);
    if (before_ms + after_ms) / 1000.0 >= period_s {
        return Err(Error::InfeasibleSpec(format!(
            "beats of {:.0} ms overlap at {} bpm",
            before_ms + after_ms,
            spec.hr_bpm
        )));
    }

    let mut samples = vec![0.0f64; n];
    let mut beats: Vec<BeatAnnotation> = Vec::new();
    let tail_limit = n as f64 - TAIL_CLEAR_S * fs;
    let segments = beat_segments(spec);
    // First beat starts at sample 0, so the record head is consistent with
    // the periodic extension of the rhythm.
    let first_c_s = before_ms / 1000.0;
    let mut k = 0usize;
    loop {
        let c_time_s = first_c_s + k as f64 * period_s;
        let c_idx = (c_time_s * fs).round();
        let start = c_idx + ms_idx(-before_ms, fs);
        let end = c_idx + ms_idx(after_ms, fs);
        if end >= tail_limit || end >= n as f64 {
            break;
        }
        if start < 0.0 {
            return Err(Error::InfeasibleSpec("first beat starts before the record".into()));
        }
        let c_idx = c_idx as usize;
        for segment in &segments {
            write_segment(&mut samples, c_idx, segment, spec.c_ampl, fs)?;
        }
        beats.push(BeatAnnotation {
            b: Some(offset_idx(c_idx, -spec.b_offset_ms, fs)),
            c: Some(c_idx),
            x: Some(offset_idx(c_idx, spec.x_offset_ms, fs)),
            o: Some(offset_idx(c_idx, spec.o_offset_ms, fs)),
            ..Default::default()
        });
        k += 1;
    }
    if beats.is_empty() {
        return Err(Error::InfeasibleSpec(format!(
            "no beat fits into {duration_s} s at {} bpm",
            spec.hr_bpm
        )));
    }

    self_check(&samples, &beats, spec, fs)?;

    apply_noise(&mut samples, &spec.noise, fs, seed);
    let signal = Signal::new(samples, fs);
    for beat in &mut beats {
        beat.fill_amplitudes(&signal);
    }
    Ok(GroundTruthRecord { signal, beats })
}

/// The ten-record corpus for one morphology: heart rate, B offset and C
/// amplitude vary per record; X and O sit at 28/36 ms so both keep one
/// sample of margin inside their search windows at 250 Hz even under mild
/// smoothing. Every cell was checked to keep all full windows in the
/// beat-covered span above the default SNR target, so a clean record is
/// delineated on the exact planted waveform; at 100 bpm the longer
/// pre-wave fronts exceed the budget with late B offsets, which is why the
/// local-minimum and notch shapes stay at early offsets there.
///
/// Records share the returned specs; callers pick durations, seeds and
/// noise (the specs are returned noise-free).
pub fn corpus_specs(morphology: Morphology) -> Vec<SyntheticBeatSpec> {
    let cells: [(f64, f64, f64); 10] = match morphology {
        Morphology::BLocalMin => [
            (60.0, 56.0, 1.0),
            (60.0, 60.0, 0.8),
            (60.0, 64.0, 1.25),
            (80.0, 56.0, 1.25),
            (80.0, 60.0, 1.0),
            (80.0, 64.0, 0.8),
            (100.0, 56.0, 1.0),
            (100.0, 60.0, 0.8),
            (60.0, 60.0, 1.25),
            (80.0, 56.0, 0.8),
        ],
        Morphology::BNotch => [
            (60.0, 56.0, 1.0),
            (60.0, 60.0, 0.8),
            (60.0, 64.0, 1.25),
            (80.0, 56.0, 1.25),
            (80.0, 60.0, 1.0),
            (80.0, 64.0, 0.8),
            (100.0, 56.0, 1.0),
            (100.0, 56.0, 0.8),
            (60.0, 56.0, 1.25),
            (80.0, 60.0, 1.25),
        ],
        Morphology::XLocalMinOnly | Morphology::BSlopeBreak => [
            (60.0, 56.0, 1.0),
            (60.0, 60.0, 0.8),
            (60.0, 64.0, 1.25),
            (80.0, 56.0, 1.25),
            (80.0, 60.0, 1.0),
            (80.0, 64.0, 0.8),
            (100.0, 56.0, 1.0),
            (100.0, 60.0, 0.8),
            (100.0, 64.0, 1.25),
            (80.0, 64.0, 1.25),
        ],
    };
    cells
        .iter()
        .map(|&(hr_bpm, b_offset_ms, c_ampl)| SyntheticBeatSpec {
            morphology,
            hr_bpm,
            c_ampl,
            b_offset_ms,
            x_offset_ms: 28.0,
            o_offset_ms: 36.0,
            noise: Vec::new(),
        })
        .collect()
}

/// Rounded sample offset of a (possibly negative) millisecond offset.
fn ms_idx(t_ms: f64, fs: f64) -> f64 {
    (t_ms * fs / 1000.0).round()
}

fn offset_idx(c_idx: usize, t_ms: f64, fs: f64) -> usize {
    (c_idx as f64 + ms_idx(t_ms, fs)) as usize
}

fn validate_spec(spec: &SyntheticBeatSpec, fs: f64) -> Result<()> {
    let fail = |msg: String| Err(Error::InfeasibleSpec(msg));
    if !(fs > 0.0) {
        return fail(format!("sampling rate must be positive, got {fs}"));
    }
    if !(spec.hr_bpm > 0.0) {
        return fail(format!("heart rate must be positive, got {}", spec.hr_bpm));
    }
    if !(spec.c_ampl > 0.0) {
        return fail(format!("C amplitude must be positive, got {}", spec.c_ampl));
    }
    if !(spec.b_offset_ms > 0.0) {
        return fail("B offset must be positive".into());
    }
    if !(spec.x_offset_ms > 0.0 && spec.x_offset_ms < spec.o_offset_ms) {
        return fail("offsets must satisfy 0 < x_offset_ms < o_offset_ms".into());
    }
    for component in &spec.noise {
        let ok = match *component {
            NoiseComponent::White { sigma } => sigma >= 0.0,
            NoiseComponent::Sinusoid { freq_hz, amp }
            | NoiseComponent::BaselineDrift { freq_hz, amp } => freq_hz > 0.0 && amp >= 0.0,
        };
        if !ok {
            return fail(format!("invalid noise component {component:?}"));
        }
    }
    Ok(())
}

/// Writes one arc into the buffer; both endpoints land exactly on their
/// anchor values.
fn write_segment(
    samples: &mut [f64],
    c_idx: usize,
    segment: &Segment,
    c_ampl: f64,
    fs: f64,
) -> Result<()> {
    let i0 = c_idx as f64 + ms_idx(segment.t0_ms, fs);
    let i1 = c_idx as f64 + ms_idx(segment.t1_ms, fs);
    if i1 <= i0 {
        return Err(Error::InfeasibleSpec(format!(
            "segment [{} ms, {} ms] collapses at {fs} Hz",
            segment.t0_ms, segment.t1_ms
        )));
    }
    let (i0, i1) = (i0 as usize, i1 as usize);
    let span = (i1 - i0) as f64;
    for i in i0..=i1 {
        let phase = (i - i0) as f64 / span;
        let blend = match segment.shape {
            Shape::Cos => 0.5 * (1.0 - (std::f64::consts::PI * phase).cos()),
            Shape::Linear => phase,
        };
        samples[i] = c_ampl * (segment.v0 + (segment.v1 - segment.v0) * blend);
    }
    Ok(())
}

/// Verifies that every planted point of the clean record is the feature its
/// morphology promises.
fn self_check(
    samples: &[f64],
    beats: &[BeatAnnotation],
    spec: &SyntheticBeatSpec,
    fs: f64,
) -> Result<()> {
    let fail = |beat: usize, msg: &str| {
        Err(Error::InfeasibleSpec(format!("beat {beat}: {msg} at {fs} Hz")))
    };
    for (k, beat) in beats.iter().enumerate() {
        let (b, c, x, o) = (
            beat.b.expect("planted"),
            beat.c.expect("planted"),
            beat.x.expect("planted"),
            beat.o.expect("planted"),
        );
        if !(b < c && c < x && x < o) {
            return fail(k, "planted points are not strictly ordered");
        }
        if !is_local_max(samples, c) {
            return fail(k, "planted C is not a strict local maximum");
        }
        match spec.morphology {
            Morphology::BSlopeBreak => {
                // The break ramp must exceed the sharper slope threshold
                // (per 4 ms, C-normalized) and the upstroke must stay free
                // of local minima that would preempt it.
                let slope = (samples[b + 1] - samples[b]) * (0.004 * fs) / spec.c_ampl;
                if slope <= 0.11 {
                    return fail(k, "slope break too gentle to register");
                }
                if (b..c).any(|i| is_local_min(samples, i)) {
                    return fail(k, "upstroke grew a spurious local minimum");
                }
            }
            _ => {
                if !is_local_min(samples, b) {
                    return fail(k, "planted B is not a strict local minimum");
                }
            }
        }
        if !is_local_min(samples, x) {
            return fail(k, "planted X is not a strict local minimum");
        }
        if !is_local_max(samples, o) {
            return fail(k, "planted O is not a strict local maximum");
        }
        if (x + 1..o).any(|i| is_local_min(samples, i)) {
            return fail(k, "ripple between X and O");
        }
        if spec.morphology == Morphology::XLocalMinOnly {
            // The diastolic trough must be a strict local minimum deeper
            // than X, somewhere between O and the end of the beat span.
            let span_end = samples
                .len()
                .min(o + ((TROUGH_FALL_MS + TROUGH_RISE_MS) * fs / 1000.0) as usize);
            let deeper =
                (o + 1..span_end).any(|i| samples[i] < samples[x] && is_local_min(samples, i));
            if !deeper {
                return fail(k, "no trough deeper than X follows O");
            }
        }
    }
    Ok(())
}

/// Adds the requested disturbances, deterministically in `seed`.
fn apply_noise(samples: &mut [f64], noise: &[NoiseComponent], fs: f64, seed: u64) {
    if noise.is_empty() {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for component in noise {
        match *component {
            NoiseComponent::White { sigma } => {
                if sigma > 0.0 {
                    let dist = Normal::new(0.0, sigma).expect("validated sigma");
                    for v in samples.iter_mut() {
                        *v += dist.sample(&mut rng);
                    }
                }
            }
            NoiseComponent::Sinusoid { freq_hz, amp }
            | NoiseComponent::BaselineDrift { freq_hz, amp } => {
                for (i, v) in samples.iter_mut().enumerate() {
                    let t = i as f64 / fs;
                    *v += amp * (2.0 * std::f64::consts::PI * freq_hz * t).sin();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sgfilter::estimate_snr;
    use crate::signal::DelineationParams;

    const FS: f64 = 250.0;

    fn all_morphologies() -> [Morphology; 4] {
        [
            Morphology::BLocalMin,
            Morphology::BNotch,
            Morphology::XLocalMinOnly,
            Morphology::BSlopeBreak,
        ]
    }

    /// The three corpus shapes (the slope-break variant is for detector
    /// tests only; its break ramp is spectrally loud by design).
    fn corpus_morphologies() -> [Morphology; 3] {
        [Morphology::BLocalMin, Morphology::BNotch, Morphology::XLocalMinOnly]
    }

    #[test]
    fn clean_records_generate_with_verified_features() {
        for morphology in all_morphologies() {
            let spec = SyntheticBeatSpec { morphology, ..Default::default() };
            let record = generate(&spec, 30.0, FS, 1).expect("clean generation succeeds");
            assert!(record.beats.len() >= 25, "{morphology:?}: too few beats");
            for beat in &record.beats {
                assert!(beat.is_ordered());
                assert!(beat.amp_c.is_some());
                // Independent re-check of the planted extrema.
                let s = &record.signal.samples;
                assert!(is_local_max(s, beat.c.unwrap()));
                assert!(is_local_min(s, beat.x.unwrap()));
                assert!(is_local_max(s, beat.o.unwrap()));
            }
        }
    }

    #[test]
    fn notch_morphology_plants_strict_minima_at_b() {
        let spec = SyntheticBeatSpec { morphology: Morphology::BNotch, ..Default::default() };
        let record = generate(&spec, 20.0, FS, 3).unwrap();
        for beat in &record.beats {
            assert!(
                is_local_min(&record.signal.samples, beat.b.unwrap()),
                "B at {} is not a strict local minimum",
                beat.b.unwrap()
            );
        }
    }

    #[test]
    fn x_local_min_only_has_a_deeper_trough() {
        let spec =
            SyntheticBeatSpec { morphology: Morphology::XLocalMinOnly, ..Default::default() };
        let record = generate(&spec, 20.0, FS, 4).unwrap();
        for beat in &record.beats {
            let x = beat.x.unwrap();
            let o = beat.o.unwrap();
            let s = &record.signal.samples;
            let deeper =
                (o + 1..s.len().min(o + 100)).any(|i| s[i] < s[x] && is_local_min(s, i));
            assert!(deeper, "no local minimum deeper than X after O at {o}");
        }
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let spec = SyntheticBeatSpec {
            noise: vec![
                NoiseComponent::White { sigma: 0.05 },
                NoiseComponent::BaselineDrift { freq_hz: 0.25, amp: 0.2 },
            ],
            ..Default::default()
        };
        let a = generate(&spec, 15.0, FS, 42).unwrap();
        let b = generate(&spec, 15.0, FS, 42).unwrap();
        assert_eq!(a.signal.samples, b.signal.samples);
        assert_eq!(a.beats, b.beats);
        let c = generate(&spec, 15.0, FS, 43).unwrap();
        assert_ne!(a.signal.samples, c.signal.samples, "different seeds must differ");
    }

    #[test]
    fn noise_moves_samples_but_not_truth_indices() {
        let clean_spec = SyntheticBeatSpec::default();
        let noisy_spec = SyntheticBeatSpec {
            noise: vec![NoiseComponent::White { sigma: 0.05 }],
            ..Default::default()
        };
        let clean = generate(&clean_spec, 15.0, FS, 9).unwrap();
        let noisy = generate(&noisy_spec, 15.0, FS, 9).unwrap();
        assert_ne!(clean.signal.samples, noisy.signal.samples);
        let idx = |r: &GroundTruthRecord| {
            r.beats.iter().map(|b| (b.b, b.c, b.x, b.o)).collect::<Vec<_>>()
        };
        assert_eq!(idx(&clean), idx(&noisy));
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        let overlap = SyntheticBeatSpec { hr_bpm: 200.0, ..Default::default() };
        assert!(matches!(generate(&overlap, 10.0, FS, 0), Err(Error::InfeasibleSpec(_))));

        let inverted =
            SyntheticBeatSpec { x_offset_ms: 40.0, o_offset_ms: 30.0, ..Default::default() };
        assert!(matches!(generate(&inverted, 10.0, FS, 0), Err(Error::InfeasibleSpec(_))));

        let bad_noise = SyntheticBeatSpec {
            noise: vec![NoiseComponent::White { sigma: -1.0 }],
            ..Default::default()
        };
        assert!(matches!(generate(&bad_noise, 10.0, FS, 0), Err(Error::InfeasibleSpec(_))));

        let too_short = SyntheticBeatSpec::default();
        assert!(matches!(generate(&too_short, 1.0, FS, 0), Err(Error::InfeasibleSpec(_))));
    }

    #[test]
    fn slope_break_survives_sampling_at_250_hz_but_not_100_hz() {
        let spec =
            SyntheticBeatSpec { morphology: Morphology::BSlopeBreak, ..Default::default() };
        generate(&spec, 10.0, 250.0, 0).expect("8 ms break is steep enough at 250 Hz");
        // At 100 Hz the break collapses to one 10 ms step whose per-4 ms
        // slope falls below the detection threshold; generation must refuse
        // rather than plant an undetectable feature.
        assert!(generate(&spec, 10.0, 100.0, 0).is_err());
    }

    #[test]
    fn clean_corpus_windows_clear_the_snr_target_at_period_divisor_rates() {
        // Every 3 s window inside the beat-covered span of a clean corpus
        // record must clear the default SNR target unfiltered, so the
        // adaptive filter stops at length 3 and delineation sees the exact
        // planted waveform. This is the spectral-budget contract described
        // in the module docs; the corpus heart rates all have periods
        // dividing the window, so it holds regardless of window alignment.
        let params = DelineationParams::default();
        for morphology in corpus_morphologies() {
            for spec in corpus_specs(morphology) {
                let record = generate(&spec, 30.0, FS, 5).unwrap();
                let n = record.signal.len();
                let window = (3.0 * FS) as usize;
                for start in [0usize, 137, 413, 871, 1530, 2204] {
                    if start + window > n {
                        continue;
                    }
                    let snr = estimate_snr(
                        &record.signal.samples[start..start + window],
                        FS,
                        params.snr_cutoff_hz,
                    )
                    .unwrap();
                    assert!(
                        snr >= params.snr_thr,
                        "{morphology:?} {} bpm b {} ms: window at {start} has SNR {snr:.1}",
                        spec.hr_bpm,
                        spec.b_offset_ms
                    );
                }
            }
        }
    }
}
