//! Scoring of detected beats against reference annotations.
//!
//! The building blocks are: tolerance-windowed one-to-one point matching,
//! the usual detection metrics (sensitivity, positive predictive value,
//! their geometric mean, detection error rate, timing error), per-beat
//! hemodynamic-parameter error statistics, an exhaustive grid search over
//! [`DelineationParams`] fields, and a fixed-versus-adaptive filter-length
//! sweep over a whole corpus.
//!
//! # Matching order
//!
//! Candidate (detected, reference) pairs inside the tolerance are consumed
//! globally by increasing distance, not by scanning one sequence. The two
//! constructions agree whenever points are spaced further apart than twice
//! the tolerance, but only the distance-ordered one treats the two
//! sequences symmetrically: swapping detected and reference then swaps the
//! false-positive and false-negative counts exactly, on every input. Ties
//! are broken by the point positions themselves (smaller first), which is
//! also invariant under the swap.

use crate::error::{Error, Result};
use crate::hemo::{compute_hemo, HemoParams};
use crate::pipeline::{run_pipeline_with_filter, FilterMode};
use crate::signal::{BeatAnnotation, DelineationParams, Signal};

// ---------------------------------------------------------------------------
// Point matching
// ---------------------------------------------------------------------------

/// The four per-beat point types carried by a [`BeatAnnotation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    B,
    C,
    X,
    O,
}

impl PointKind {
    /// All point kinds, in reporting order.
    pub const ALL: [PointKind; 4] = [PointKind::B, PointKind::C, PointKind::X, PointKind::O];

    /// Reads this point's sample index from an annotation.
    pub fn of(self, beat: &BeatAnnotation) -> Option<usize> {
        match self {
            PointKind::B => beat.b,
            PointKind::C => beat.c,
            PointKind::X => beat.x,
            PointKind::O => beat.o,
        }
    }

    /// Lower-case label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            PointKind::B => "b",
            PointKind::C => "c",
            PointKind::X => "x",
            PointKind::O => "o",
        }
    }
}

/// Outcome of matching one detected point sequence against one reference
/// sequence at a fixed tolerance.
///
/// The bookkeeping identities hold by construction:
/// `true_positives + false_negatives` is the reference count,
/// `true_positives + false_positives` is the detected count, and
/// `matched_offsets_ms` has exactly `true_positives` entries, each within
/// the (closed) tolerance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchResult {
    /// Number of matched pairs.
    pub true_positives: usize,
    /// Detected points left without a partner.
    pub false_positives: usize,
    /// Reference points left without a partner.
    pub false_negatives: usize,
    /// Signed timing offsets of the matched pairs, detected minus
    /// reference, in ms, in reference order.
    pub matched_offsets_ms: Vec<f64>,
}

/// Greedy one-to-one pairing of two sorted index sequences.
///
/// Candidate pairs within `tol_samples` are consumed by increasing
/// distance, so every matched reference point ends up with the nearest
/// detected point that was still unconsumed when its turn came. Ties on
/// distance are resolved by the smaller pair of positions, independent of
/// which side they come from. Returns `(detected_idx, reference_idx)`
/// pairs sorted by reference index.
fn matched_pairs(detected: &[usize], reference: &[usize], tol_samples: f64) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(usize, usize, usize, usize, usize)> = Vec::new();
    for (di, &d) in detected.iter().enumerate() {
        for (rj, &r) in reference.iter().enumerate() {
            let dist = d.abs_diff(r);
            if dist as f64 <= tol_samples {
                candidates.push((dist, d.min(r), d.max(r), di, rj));
            }
        }
    }
    candidates.sort_unstable();

    let mut detected_used = vec![false; detected.len()];
    let mut reference_used = vec![false; reference.len()];
    let mut pairs = Vec::new();
    for (_, _, _, di, rj) in candidates {
        if detected_used[di] || reference_used[rj] {
            continue;
        }
        detected_used[di] = true;
        reference_used[rj] = true;
        pairs.push((di, rj));
    }
    pairs.sort_unstable_by_key(|&(_, rj)| rj);
    pairs
}

/// Matches a detected point sequence against a reference sequence.
///
/// Both sequences must be sorted ascending (sample indices). A detected
/// point and a reference point may pair up when they are at most
/// `tolerance_ms` apart — the boundary is inclusive, so at 1000 Hz and a
/// 30 ms tolerance a 30-sample offset still counts as a match. Matching is
/// one-to-one; leftovers become false positives (detected side) and false
/// negatives (reference side).
pub fn match_points(
    detected: &[usize],
    reference: &[usize],
    tolerance_ms: f64,
    fs: f64,
) -> MatchResult {
    debug_assert!(detected.windows(2).all(|w| w[0] <= w[1]), "detected must be sorted");
    debug_assert!(reference.windows(2).all(|w| w[0] <= w[1]), "reference must be sorted");
    let tol_samples = tolerance_ms * fs / 1000.0;
    let pairs = matched_pairs(detected, reference, tol_samples);
    let matched_offsets_ms = pairs
        .iter()
        .map(|&(di, rj)| (detected[di] as f64 - reference[rj] as f64) * 1000.0 / fs)
        .collect::<Vec<_>>();
    MatchResult {
        true_positives: pairs.len(),
        false_positives: detected.len() - pairs.len(),
        false_negatives: reference.len() - pairs.len(),
        matched_offsets_ms,
    }
}

// ---------------------------------------------------------------------------
// Detection metrics
// ---------------------------------------------------------------------------

/// Detection metrics of one point type on one record. Every metric is
/// `None` when its denominator is zero (nothing to detect, or nothing
/// detected), rather than pretending to a value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionScore {
    /// Sensitivity, percent: `100·tp/(tp+fn)`.
    pub se: Option<f64>,
    /// Positive predictive value, percent: `100·tp/(tp+fp)`.
    pub ppv: Option<f64>,
    /// Geometric mean of sensitivity and positive predictive value.
    pub gmean: Option<f64>,
    /// Detection error rate, percent: `100·(fp+fn)/(tp+fn)`.
    pub der: Option<f64>,
    /// Mean absolute timing offset of the matched pairs, ms.
    pub me_ms: Option<f64>,
    /// Population standard deviation of the absolute offsets, ms.
    pub sigma_ms: Option<f64>,
}

/// Geometric mean of two percentages.
pub fn gmean_from_rates(se_pct: f64, ppv_pct: f64) -> f64 {
    (se_pct * ppv_pct).sqrt()
}

/// Mean and population standard deviation (`ddof = 0`); `None` on empty
/// input.
fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Computes the detection metrics of one [`MatchResult`].
pub fn score(matches: &MatchResult) -> DetectionScore {
    let tp = matches.true_positives as f64;
    let fp = matches.false_positives as f64;
    let fneg = matches.false_negatives as f64;
    let refs = tp + fneg;
    let dets = tp + fp;

    let se = (refs > 0.0).then(|| 100.0 * tp / refs);
    let ppv = (dets > 0.0).then(|| 100.0 * tp / dets);
    let gmean = match (se, ppv) {
        (Some(s), Some(p)) => Some(gmean_from_rates(s, p)),
        _ => None,
    };
    let der = (refs > 0.0).then(|| 100.0 * (fp + fneg) / refs);

    let abs: Vec<f64> = matches.matched_offsets_ms.iter().map(|o| o.abs()).collect();
    let (me_ms, sigma_ms) = match mean_std(&abs) {
        Some((m, s)) => (Some(m), Some(s)),
        None => (None, None),
    };
    DetectionScore { se, ppv, gmean, der, me_ms, sigma_ms }
}

// ---------------------------------------------------------------------------
// Record- and corpus-level evaluation
// ---------------------------------------------------------------------------

/// Per-point-type match results of one record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordEval {
    pub b: MatchResult,
    pub c: MatchResult,
    pub x: MatchResult,
    pub o: MatchResult,
}

impl RecordEval {
    /// The match result for one point kind.
    pub fn of(&self, kind: PointKind) -> &MatchResult {
        match kind {
            PointKind::B => &self.b,
            PointKind::C => &self.c,
            PointKind::X => &self.x,
            PointKind::O => &self.o,
        }
    }

    /// Detection metrics for one point kind.
    pub fn score_of(&self, kind: PointKind) -> DetectionScore {
        score(self.of(kind))
    }
}

/// Extracts one point type from a beat list as a sorted index sequence.
fn point_sequence(beats: &[BeatAnnotation], kind: PointKind) -> Vec<usize> {
    let mut seq: Vec<usize> = beats.iter().filter_map(|b| kind.of(b)).collect();
    seq.sort_unstable();
    seq
}

/// Matches every point type of one record at the given tolerance.
pub fn evaluate_record(
    detected: &[BeatAnnotation],
    reference: &[BeatAnnotation],
    tolerance_ms: f64,
    fs: f64,
) -> RecordEval {
    let eval_kind = |kind: PointKind| {
        match_points(
            &point_sequence(detected, kind),
            &point_sequence(reference, kind),
            tolerance_ms,
            fs,
        )
    };
    RecordEval {
        b: eval_kind(PointKind::B),
        c: eval_kind(PointKind::C),
        x: eval_kind(PointKind::X),
        o: eval_kind(PointKind::O),
    }
}

/// Unweighted mean ± population standard deviation of one metric across
/// records, with the number of records that contributed a value.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Corpus-level summary of one point type: each per-record metric reduced
/// to mean ± std across the records where it was defined.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSummary {
    pub se: Option<Summary>,
    pub ppv: Option<Summary>,
    pub gmean: Option<Summary>,
    pub der: Option<Summary>,
    pub me_ms: Option<Summary>,
}

/// Corpus-level detection summary for all four point types.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusEval {
    pub b: PointSummary,
    pub c: PointSummary,
    pub x: PointSummary,
    pub o: PointSummary,
}

impl CorpusEval {
    /// The summary for one point kind.
    pub fn of(&self, kind: PointKind) -> &PointSummary {
        match kind {
            PointKind::B => &self.b,
            PointKind::C => &self.c,
            PointKind::X => &self.x,
            PointKind::O => &self.o,
        }
    }
}

/// Aggregates per-record evaluations into per-metric mean ± std across
/// records. Records where a metric is undefined are skipped for that
/// metric; `n` reports how many contributed.
pub fn aggregate(records: &[RecordEval]) -> CorpusEval {
    let summarize_kind = |kind: PointKind| {
        let scores: Vec<DetectionScore> =
            records.iter().map(|r| r.score_of(kind)).collect();
        let summarize = |select: fn(&DetectionScore) -> Option<f64>| {
            let values: Vec<f64> = scores.iter().filter_map(select).collect();
            mean_std(&values).map(|(mean, std)| Summary { mean, std, n: values.len() })
        };
        PointSummary {
            se: summarize(|s| s.se),
            ppv: summarize(|s| s.ppv),
            gmean: summarize(|s| s.gmean),
            der: summarize(|s| s.der),
            me_ms: summarize(|s| s.me_ms),
        }
    };
    CorpusEval {
        b: summarize_kind(PointKind::B),
        c: summarize_kind(PointKind::C),
        x: summarize_kind(PointKind::X),
        o: summarize_kind(PointKind::O),
    }
}

// ---------------------------------------------------------------------------
// Hemodynamic-parameter error
// ---------------------------------------------------------------------------

/// Mean ± population standard deviation of one error series, with the
/// number of beats that contributed.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    pub mean: f64,
    pub std: f64,
    pub beats: usize,
}

/// Absolute and relative error statistics of one hemodynamic parameter.
/// `abs` is in the parameter's own unit (ms for the time intervals, signal
/// units for the amplitude); `rel` is the absolute error divided by the
/// reference value, as a fraction. Either is `None` when no matched beat
/// pair had the parameter on both sides.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HemoParamError {
    pub abs: Option<ErrorStats>,
    pub rel: Option<ErrorStats>,
}

/// Hemodynamic error of one record, over the C-matched beat pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HemoErrorReport {
    /// Heart-rate error, measured on the C-to-C interval in ms (the rate is
    /// the interval's reciprocal; the interval carries the same information
    /// in stable units).
    pub hr: HemoParamError,
    /// Ejection-time (B to X) error, ms.
    pub lvet: HemoParamError,
    /// Relaxation-time (X to O) error, ms.
    pub ivrt: HemoParamError,
    /// B-to-C amplitude-difference error, signal units.
    pub bc_ampl: HemoParamError,
}

/// Accumulates absolute and relative errors of one parameter over beat
/// pairs, then reduces to [`HemoParamError`].
#[derive(Default)]
struct ParamAccumulator {
    abs: Vec<f64>,
    rel: Vec<f64>,
}

impl ParamAccumulator {
    fn push(&mut self, detected: Option<f64>, reference: Option<f64>) {
        if let (Some(det), Some(reference)) = (detected, reference) {
            let abs = (reference - det).abs();
            self.abs.push(abs);
            if reference.abs() > 1e-12 {
                self.rel.push(abs / reference.abs());
            }
        }
    }

    fn finish(self) -> HemoParamError {
        let stats = |values: Vec<f64>| {
            mean_std(&values).map(|(mean, std)| ErrorStats { mean, std, beats: values.len() })
        };
        HemoParamError { abs: stats(self.abs), rel: stats(self.rel) }
    }
}

/// Compares the hemodynamic parameters of detected beats against reference
/// beats.
///
/// Beats are paired by matching their C points at `tolerance_ms`; each
/// side's parameters are computed within its own beat sequence (so the
/// C-to-C interval of a detected beat uses the *next detected* C, not the
/// reference one). A pair contributes to a parameter only when both sides
/// have it; everything else is excluded from that parameter's average.
pub fn hemo_error(
    detected: &[BeatAnnotation],
    reference: &[BeatAnnotation],
    tolerance_ms: f64,
    fs: f64,
) -> HemoErrorReport {
    // Beats without a C cannot be paired at all.
    let det_c: Vec<(usize, usize)> =
        detected.iter().enumerate().filter_map(|(i, b)| b.c.map(|c| (i, c))).collect();
    let ref_c: Vec<(usize, usize)> =
        reference.iter().enumerate().filter_map(|(i, b)| b.c.map(|c| (i, c))).collect();
    let det_pos: Vec<usize> = det_c.iter().map(|&(_, c)| c).collect();
    let ref_pos: Vec<usize> = ref_c.iter().map(|&(_, c)| c).collect();

    let tol_samples = tolerance_ms * fs / 1000.0;
    let pairs = matched_pairs(&det_pos, &ref_pos, tol_samples);

    let det_hemo = compute_hemo(detected, fs);
    let ref_hemo = compute_hemo(reference, fs);

    let mut hr = ParamAccumulator::default();
    let mut lvet = ParamAccumulator::default();
    let mut ivrt = ParamAccumulator::default();
    let mut bc_ampl = ParamAccumulator::default();
    for (di, rj) in pairs {
        let det: &HemoParams = &det_hemo[det_c[di].0];
        let refp: &HemoParams = &ref_hemo[ref_c[rj].0];
        hr.push(det.cc_time_ms, refp.cc_time_ms);
        lvet.push(det.lvet_ms, refp.lvet_ms);
        ivrt.push(det.ivrt_ms, refp.ivrt_ms);
        bc_ampl.push(det.bc_ampl, refp.bc_ampl);
    }
    HemoErrorReport {
        hr: hr.finish(),
        lvet: lvet.finish(),
        ivrt: ivrt.finish(),
        bc_ampl: bc_ampl.finish(),
    }
}

// ---------------------------------------------------------------------------
// Corpus runs
// ---------------------------------------------------------------------------

/// One record of a labelled corpus: the raw signal plus its reference
/// annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedRecord {
    pub signal: Signal,
    pub reference: Vec<BeatAnnotation>,
}

/// Runs the delineation pipeline over a corpus with one filter mode and
/// returns the per-point-type Gmean in B, C, X, O order: the unweighted
/// mean across records of each record's Gmean, counting a record where the
/// Gmean is undefined (nothing detected for that type) as 0 — a
/// configuration that detects nothing must not score above one that
/// detects something.
pub fn corpus_gmeans(
    corpus: &[AnnotatedRecord],
    params: &DelineationParams,
    mode: FilterMode,
    tolerance_ms: f64,
) -> Result<[f64; 4]> {
    if corpus.is_empty() {
        return Err(Error::InvalidParams("corpus evaluation needs at least one record".into()));
    }
    let mut sums = [0.0f64; 4];
    for record in corpus {
        let detected = run_pipeline_with_filter(&record.signal, params, mode)?;
        let eval =
            evaluate_record(&detected, &record.reference, tolerance_ms, record.signal.fs);
        for (slot, kind) in sums.iter_mut().zip(PointKind::ALL) {
            *slot += eval.score_of(kind).gmean.unwrap_or(0.0);
        }
    }
    Ok(sums.map(|s| s / corpus.len() as f64))
}

// ---------------------------------------------------------------------------
// Grid-search calibration
// ---------------------------------------------------------------------------

/// One axis of the calibration grid: a parameter field name (see
/// [`crate::signal::PARAM_FIELDS`]) and the values to try for it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub field: String,
    pub values: Vec<f64>,
}

/// Score of one grid combination. `objective` is `None` when the
/// combination fails parameter validation or cannot run.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    /// One value per grid axis, in axis order.
    pub values: Vec<f64>,
    /// Mean corpus Gmean over the B, X and O points (C is insensitive to
    /// the searched parameters and would only dilute the objective).
    pub objective: Option<f64>,
    pub gmean_b: Option<f64>,
    pub gmean_x: Option<f64>,
    pub gmean_o: Option<f64>,
}

/// Result of a grid search: the winning parameter set and the full table.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub best_params: DelineationParams,
    pub best_objective: f64,
    /// Index of the winning row in `table`.
    pub best_index: usize,
    /// Every evaluated combination, in grid order (last axis fastest).
    pub table: Vec<GridPoint>,
}

/// Exhaustively evaluates the Cartesian grid spanned by `axes` on top of
/// `base`, scoring each combination on the corpus.
///
/// The winner is the combination with the highest objective; on ties the
/// one that comes first in grid order wins, which makes the search
/// deterministic. Combinations that fail validation stay in the table with
/// an absent objective and are never selected.
///
/// # Errors
///
/// [`Error::EmptyGrid`] when there are no axes or an axis has no values;
/// [`Error::InvalidParams`] when the corpus is empty or no combination is
/// usable.
pub fn calibrate(
    corpus: &[AnnotatedRecord],
    base: &DelineationParams,
    axes: &[GridAxis],
    tolerance_ms: f64,
) -> Result<Calibration> {
    if axes.is_empty() || axes.iter().any(|a| a.values.is_empty()) {
        return Err(Error::EmptyGrid);
    }
    if corpus.is_empty() {
        return Err(Error::InvalidParams("calibration needs at least one record".into()));
    }

    let mut table = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    let mut best_params = base.clone();
    let mut indices = vec![0usize; axes.len()];
    loop {
        let values: Vec<f64> =
            indices.iter().zip(axes).map(|(&i, axis)| axis.values[i]).collect();
        let mut params = base.clone();
        let mut usable = true;
        for (axis, &value) in axes.iter().zip(&values) {
            if params.set_field(&axis.field, value).is_err() {
                usable = false;
                break;
            }
        }
        let gmeans = if usable {
            corpus_gmeans(corpus, &params, FilterMode::Adaptive, tolerance_ms).ok()
        } else {
            None
        };
        let row = match gmeans {
            Some([b, _, x, o]) => GridPoint {
                values,
                objective: Some((b + x + o) / 3.0),
                gmean_b: Some(b),
                gmean_x: Some(x),
                gmean_o: Some(o),
            },
            None => GridPoint {
                values,
                objective: None,
                gmean_b: None,
                gmean_x: None,
                gmean_o: None,
            },
        };
        if let Some(objective) = row.objective {
            // Strictly-greater keeps the first row of a tie.
            if best.map_or(true, |(_, so_far)| objective > so_far) {
                best = Some((table.len(), objective));
                best_params = params;
            }
        }
        table.push(row);

        // Odometer step, last axis fastest.
        let mut axis = axes.len();
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            indices[axis] += 1;
            if indices[axis] < axes[axis].values.len() {
                break;
            }
            indices[axis] = 0;
            if axis == 0 {
                let (best_index, best_objective) = best.ok_or_else(|| {
                    Error::InvalidParams(
                        "every grid combination fails validation or cannot run".into(),
                    )
                })?;
                return Ok(Calibration { best_params, best_objective, best_index, table });
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Filter-length sweep
// ---------------------------------------------------------------------------

/// Corpus Gmeans of one filter configuration; see [`corpus_gmeans`] for the
/// averaging convention.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub mode: FilterMode,
    pub gmean_b: f64,
    pub gmean_c: f64,
    pub gmean_x: f64,
    pub gmean_o: f64,
}

impl SweepEntry {
    /// The four Gmeans in B, C, X, O order.
    pub fn gmeans(&self) -> [f64; 4] {
        [self.gmean_b, self.gmean_c, self.gmean_x, self.gmean_o]
    }
}

/// Runs the pipeline once adaptively and once per fixed filter length, and
/// reports per-point-type corpus Gmeans for each configuration. The
/// adaptive entry comes first, then the fixed lengths in the given order.
///
/// # Errors
///
/// [`Error::InvalidKernelGeometry`] for an even or zero length; corpus and
/// pipeline errors propagate.
pub fn sweep_filter_lengths(
    corpus: &[AnnotatedRecord],
    params: &DelineationParams,
    lengths: &[usize],
    tolerance_ms: f64,
) -> Result<Vec<SweepEntry>> {
    for &length in lengths {
        if length == 0 || length % 2 == 0 {
            return Err(Error::InvalidKernelGeometry { length, order: params.sg_order });
        }
    }
    let mut entries = Vec::with_capacity(lengths.len() + 1);
    let push = |mode: FilterMode, entries: &mut Vec<SweepEntry>| -> Result<()> {
        let [gmean_b, gmean_c, gmean_x, gmean_o] =
            corpus_gmeans(corpus, params, mode, tolerance_ms)?;
        entries.push(SweepEntry { mode, gmean_b, gmean_c, gmean_x, gmean_o });
        Ok(())
    };
    push(FilterMode::Adaptive, &mut entries)?;
    for &length in lengths {
        push(FilterMode::Fixed(length), &mut entries)?;
    }
    Ok(entries)
}

// ---------------------------------------------------------------------------
