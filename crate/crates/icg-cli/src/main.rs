//! `icg` — command-line front end for the delineation engine.
//!
//! Subcommands: `delineate` (signal file in, annotation file out), `eval`
//! (detected vs reference annotations, metrics report out), `synth`
//! (generate a labelled test record), `calibrate` (grid search over
//! detection parameters on a labelled corpus), `sweep` (fixed-vs-adaptive
//! filter length comparison) and `plotdata` (aligned signal + marker
//! series for external plotting).
//!
//! Exit codes: 0 on success, 1 for command-line usage errors, 2 for data
//! errors (unreadable or malformed files, infeasible configurations); data
//! diagnostics are one line and name the offending path.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use icg_core::eval::{
    calibrate, evaluate_record, hemo_error, score, sweep_filter_lengths, AnnotatedRecord,
    GridAxis, HemoParamError, PointKind,
};
use icg_core::pipeline::{run_pipeline, FilterMode};
use icg_core::signal::{BeatAnnotation, DelineationParams, Signal};
use icg_core::synth::{generate, Morphology, NoiseComponent, SyntheticBeatSpec};

mod io;
use io::{DataError, DataResult};

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "icg",
    version,
    about = "Beat-to-beat delineation of impedance-cardiogram records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect B/C/X/O points in a signal file and write an annotation table.
    Delineate {
        /// Signal file: `time_s,value` rows, or one `value` column with --fs.
        #[arg(long)]
        input: PathBuf,
        /// Sampling rate in Hz; required for single-column input, overrides
        /// the inferred rate otherwise.
        #[arg(long)]
        fs: Option<f64>,
        /// Optional key=value file overriding detection parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Output annotation file (`b,c,x,o` rows).
        #[arg(long)]
        out: PathBuf,
    },
    /// Score detected annotations against reference annotations.
    Eval {
        /// Detected annotation file.
        #[arg(long)]
        detected: PathBuf,
        /// Reference annotation file.
        #[arg(long)]
        reference: PathBuf,
        /// Matching tolerance in ms (closed boundary).
        #[arg(long, default_value_t = 30.0)]
        tolerance_ms: f64,
        /// Sampling rate the annotation indices refer to, Hz.
        #[arg(long)]
        fs: f64,
        /// Optional signal file; when given, B/C amplitudes are read from it
        /// so the amplitude-difference error can be reported.
        #[arg(long)]
        signal: Option<PathBuf>,
        /// Output report (key=value lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic labelled record.
    Synth {
        /// Key=value spec: morphology, hr_bpm, c_ampl, b/x/o_offset_ms,
        /// white_sigma, sinusoid_hz + sinusoid_amp, drift_hz + drift_amp.
        #[arg(long)]
        spec: PathBuf,
        /// Record duration, s.
        #[arg(long)]
        seconds: f64,
        /// Noise seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampling rate, Hz.
        #[arg(long, default_value_t = 250.0)]
        fs: f64,
        /// Output prefix: writes PREFIX.csv (signal) and PREFIX.ann (truth).
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid-search detection parameters on a labelled corpus directory.
    Calibrate {
        /// Directory of NAME.csv + NAME.ann record pairs.
        #[arg(long)]
        corpus: PathBuf,
        /// Key=value file: field=comma-separated values per grid axis.
        #[arg(long)]
        grid: PathBuf,
        /// Optional base parameter file.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Matching tolerance in ms.
        #[arg(long, default_value_t = 30.0)]
        tolerance_ms: f64,
        /// Sampling rate override for single-column corpus signals.
        #[arg(long)]
        fs: Option<f64>,
        /// Output score table (key=value lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the adaptive filter against fixed lengths on a corpus.
    Sweep {
        /// Directory of NAME.csv + NAME.ann record pairs.
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated odd filter lengths, e.g. 5,9,13,17,21,25.
        #[arg(long)]
        lengths: String,
        /// Optional base parameter file.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Matching tolerance in ms.
        #[arg(long, default_value_t = 30.0)]
        tolerance_ms: f64,
        /// Sampling rate override for single-column corpus signals.
        #[arg(long)]
        fs: Option<f64>,
        /// Output table (key=value lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge a signal with annotations into one plot-ready table.
    Plotdata {
        /// Signal file.
        #[arg(long)]
        input: PathBuf,
        /// Annotation file to mark on the signal.
        #[arg(long)]
        annotations: PathBuf,
        /// Sampling rate; required for single-column input.
        #[arg(long)]
        fs: Option<f64>,
        /// Output `time_s,value,marker` table.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> DataResult<()> {
    match cli.command {
        Command::Delineate { input, fs, params, out } => cmd_delineate(&input, fs, params, &out),
        Command::Eval { detected, reference, tolerance_ms, fs, signal, out } => {
            cmd_eval(&detected, &reference, tolerance_ms, fs, signal, &out)
        }
        Command::Synth { spec, seconds, seed, fs, out } => {
            cmd_synth(&spec, seconds, seed, fs, &out)
        }
        Command::Calibrate { corpus, grid, params, tolerance_ms, fs, out } => {
            cmd_calibrate(&corpus, &grid, params, tolerance_ms, fs, &out)
        }
        Command::Sweep { corpus, lengths, params, tolerance_ms, fs, out } => {
            cmd_sweep(&corpus, &lengths, params, tolerance_ms, fs, &out)
        }
        Command::Plotdata { input, annotations, fs, out } => {
            cmd_plotdata(&input, &annotations, fs, &out)
        }
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn load_params(path: Option<&PathBuf>) -> DataResult<DelineationParams> {
    let base = DelineationParams::default();
    match path {
        Some(path) => io::read_params(path, &base),
        None => Ok(base),
    }
}

/// Loads every NAME.csv + NAME.ann pair of a corpus directory, sorted by
/// name for deterministic processing order.
fn load_corpus(dir: &Path, fs_flag: Option<f64>) -> DataResult<Vec<AnnotatedRecord>> {
    let entries = fs::read_dir(dir)
        .map_err(|err| DataError(format!("cannot read {}: {err}", dir.display())))?;
    let mut csvs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    csvs.sort();
    let mut corpus = Vec::new();
    for csv in csvs {
        let ann = csv.with_extension("ann");
        if !ann.exists() {
            return Err(DataError(format!(
                "{} has no matching annotation file {}",
                csv.display(),
                ann.display()
            )));
        }
        let signal = io::read_signal(&csv, fs_flag)?;
        let reference = io::read_annotations(&ann)?;
        corpus.push(AnnotatedRecord { signal, reference });
    }
    if corpus.is_empty() {
        return Err(DataError(format!(
            "{} contains no .csv/.ann record pairs",
            dir.display()
        )));
    }
    Ok(corpus)
}

fn write_report(path: &Path, lines: &[String]) -> DataResult<()> {
    let mut out = String::new();
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    fs::write(path, out).map_err(|err| DataError(format!("cannot write {}: {err}", path.display())))
}

fn check_annotation_bounds(
    beats: &[BeatAnnotation],
    signal: &Signal,
    path: &Path,
) -> DataResult<()> {
    for beat in beats {
        for idx in [beat.b, beat.c, beat.x, beat.o].into_iter().flatten() {
            if idx >= signal.len() {
                return Err(DataError(format!(
                    "{}: sample index {idx} is outside the {}-sample signal",
                    path.display(),
                    signal.len()
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// delineate
// ---------------------------------------------------------------------------

fn cmd_delineate(
    input: &Path,
    fs: Option<f64>,
    params: Option<PathBuf>,
    out: &Path,
) -> DataResult<()> {
    let signal = io::read_signal(input, fs)?;
    let params = load_params(params.as_ref())?;
    let beats = run_pipeline(&signal, &params)
        .map_err(|err| DataError(format!("{}: {err}", input.display())))?;
    io::write_annotations(out, &beats)
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn cmd_eval(
    detected_path: &Path,
    reference_path: &Path,
    tolerance_ms: f64,
    fs: f64,
    signal: Option<PathBuf>,
    out: &Path,
) -> DataResult<()> {
    if fs <= 0.0 {
        return Err(DataError(format!("--fs must be positive, got {fs}")));
    }
    let mut detected = io::read_annotations(detected_path)?;
    let mut reference = io::read_annotations(reference_path)?;
    if let Some(signal_path) = signal {
        let signal = io::read_signal(&signal_path, Some(fs))?;
        check_annotation_bounds(&detected, &signal, detected_path)?;
        check_annotation_bounds(&reference, &signal, reference_path)?;
        for beat in detected.iter_mut().chain(reference.iter_mut()) {
            beat.fill_amplitudes(&signal);
        }
    }

    let eval = evaluate_record(&detected, &reference, tolerance_ms, fs);
    let mut lines = vec![format!("tolerance_ms={tolerance_ms}"), format!("fs={fs}")];
    for kind in PointKind::ALL {
        let label = kind.label();
        let matches = eval.of(kind);
        lines.push(format!("{label}.tp={}", matches.true_positives));
        lines.push(format!("{label}.fp={}", matches.false_positives));
        lines.push(format!("{label}.fn={}", matches.false_negatives));
        let s = score(matches);
        let metrics = [
            ("se", s.se),
            ("ppv", s.ppv),
            ("gmean", s.gmean),
            ("der", s.der),
            ("me_ms", s.me_ms),
            ("sigma_ms", s.sigma_ms),
        ];
        for (name, value) in metrics {
            if let Some(v) = value {
                lines.push(format!("{label}.{name}={v:.4}"));
            }
        }
    }

    let hemo = hemo_error(&detected, &reference, tolerance_ms, fs);
    let params: [(&str, &HemoParamError); 4] = [
        ("hr", &hemo.hr),
        ("lvet", &hemo.lvet),
        ("ivrt", &hemo.ivrt),
        ("bc_ampl", &hemo.bc_ampl),
    ];
    for (label, param) in params {
        if let Some(stats) = &param.abs {
            lines.push(format!("hemo.{label}.abs_mean={:.4}", stats.mean));
            lines.push(format!("hemo.{label}.abs_std={:.4}", stats.std));
            lines.push(format!("hemo.{label}.beats={}", stats.beats));
        }
        if let Some(stats) = &param.rel {
            lines.push(format!("hemo.{label}.rel_mean={:.6}", stats.mean));
            lines.push(format!("hemo.{label}.rel_std={:.6}", stats.std));
        }
    }
    write_report(out, &lines)
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn parse_morphology(name: &str) -> Option<Morphology> {
    match name {
        "b-local-min" => Some(Morphology::BLocalMin),
        "b-notch" => Some(Morphology::BNotch),
        "x-local-min-only" => Some(Morphology::XLocalMinOnly),
        "b-slope-break" => Some(Morphology::BSlopeBreak),
        _ => None,
    }
}

fn spec_from_config(path: &Path) -> DataResult<SyntheticBeatSpec> {
    let mut spec = SyntheticBeatSpec::default();
    let mut numbers: BTreeMap<String, f64> = BTreeMap::new();
    for (key, value) in io::read_kv(path)? {
        if key == "morphology" {
            spec.morphology = parse_morphology(&value).ok_or_else(|| {
                DataError(format!(
                    "{}: unknown morphology '{value}' (expected b-local-min, b-notch, \
                     x-local-min-only or b-slope-break)",
                    path.display()
                ))
            })?;
            continue;
        }
        let number: f64 = value.parse().map_err(|_| {
            DataError(format!("{}: {key}: '{value}' is not a number", path.display()))
        })?;
        match key.as_str() {
            "hr_bpm" => spec.hr_bpm = number,
            "c_ampl" => spec.c_ampl = number,
            "b_offset_ms" => spec.b_offset_ms = number,
            "x_offset_ms" => spec.x_offset_ms = number,
            "o_offset_ms" => spec.o_offset_ms = number,
            "white_sigma" | "sinusoid_hz" | "sinusoid_amp" | "drift_hz" | "drift_amp" => {
                numbers.insert(key, number);
            }
            _ => {
                return Err(DataError(format!(
                    "{}: unknown spec key '{key}'",
                    path.display()
                )))
            }
        }
    }

    let paired = |hz_key: &str, amp_key: &str| -> DataResult<Option<(f64, f64)>> {
        match (numbers.get(hz_key), numbers.get(amp_key)) {
            (Some(&hz), Some(&amp)) => Ok(Some((hz, amp))),
            (None, None) => Ok(None),
            _ => Err(DataError(format!(
                "{}: {hz_key} and {amp_key} must be given together",
                path.display()
            ))),
        }
    };
    if let Some(&sigma) = numbers.get("white_sigma") {
        spec.noise.push(NoiseComponent::White { sigma });
    }
    if let Some((freq_hz, amp)) = paired("sinusoid_hz", "sinusoid_amp")? {
        spec.noise.push(NoiseComponent::Sinusoid { freq_hz, amp });
    }
    if let Some((freq_hz, amp)) = paired("drift_hz", "drift_amp")? {
        spec.noise.push(NoiseComponent::BaselineDrift { freq_hz, amp });
    }
    Ok(spec)
}

fn cmd_synth(spec_path: &Path, seconds: f64, seed: u64, fs: f64, out: &Path) -> DataResult<()> {
    let spec = spec_from_config(spec_path)?;
    let record = generate(&spec, seconds, fs, seed)
        .map_err(|err| DataError(format!("{}: {err}", spec_path.display())))?;
    let csv = out.with_extension("csv");
    let ann = out.with_extension("ann");
    io::write_signal(&csv, &record.signal)?;
    io::write_annotations(&ann, &record.beats)
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

fn cmd_calibrate(
    corpus_dir: &Path,
    grid_path: &Path,
    params: Option<PathBuf>,
    tolerance_ms: f64,
    fs: Option<f64>,
    out: &Path,
) -> DataResult<()> {
    let corpus = load_corpus(corpus_dir, fs)?;
    let base = load_params(params.as_ref())?;
    let mut axes = Vec::new();
    for (field, values) in io::read_kv(grid_path)? {
        let mut parsed = Vec::new();
        for value in values.split(',') {
            let value = value.trim();
            parsed.push(value.parse::<f64>().map_err(|_| {
                DataError(format!(
                    "{}: {field}: '{value}' is not a number",
                    grid_path.display()
                ))
            })?);
        }
        axes.push(GridAxis { field, values: parsed });
    }

    let calibration = calibrate(&corpus, &base, &axes, tolerance_ms)
        .map_err(|err| DataError(format!("{}: {err}", grid_path.display())))?;

    let mut lines = vec![format!("tolerance_ms={tolerance_ms}")];
    for (i, row) in calibration.table.iter().enumerate() {
        for (axis, value) in axes.iter().zip(&row.values) {
            lines.push(format!("grid.{i}.{}={}", axis.field, value));
        }
        match row.objective {
            Some(objective) => {
                lines.push(format!("grid.{i}.objective={objective:.4}"));
                lines.push(format!("grid.{i}.gmean_b={:.4}", row.gmean_b.unwrap()));
                lines.push(format!("grid.{i}.gmean_x={:.4}", row.gmean_x.unwrap()));
                lines.push(format!("grid.{i}.gmean_o={:.4}", row.gmean_o.unwrap()));
            }
            None => lines.push(format!("grid.{i}.objective=unusable")),
        }
    }
    lines.push(format!("best.index={}", calibration.best_index));
    lines.push(format!("best.objective={:.4}", calibration.best_objective));
    let best_row = &calibration.table[calibration.best_index];
    for (axis, value) in axes.iter().zip(&best_row.values) {
        lines.push(format!("best.{}={}", axis.field, value));
    }
    write_report(out, &lines)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn cmd_sweep(
    corpus_dir: &Path,
    lengths: &str,
    params: Option<PathBuf>,
    tolerance_ms: f64,
    fs: Option<f64>,
    out: &Path,
) -> DataResult<()> {
    let corpus = load_corpus(corpus_dir, fs)?;
    let base = load_params(params.as_ref())?;
    let mut parsed = Vec::new();
    for piece in lengths.split(',') {
        let piece = piece.trim();
        parsed.push(piece.parse::<usize>().map_err(|_| {
            DataError(format!("--lengths: '{piece}' is not a filter length"))
        })?);
    }
    let entries = sweep_filter_lengths(&corpus, &base, &parsed, tolerance_ms)
        .map_err(|err| DataError(format!("sweep failed: {err}")))?;

    let mut lines = vec![format!("tolerance_ms={tolerance_ms}")];
    for entry in entries {
        let label = match entry.mode {
            FilterMode::Adaptive => "adaptive".to_string(),
            FilterMode::Fixed(l) => format!("fixed_{l}"),
        };
        lines.push(format!("{label}.gmean_b={:.4}", entry.gmean_b));
        lines.push(format!("{label}.gmean_c={:.4}", entry.gmean_c));
        lines.push(format!("{label}.gmean_x={:.4}", entry.gmean_x));
        lines.push(format!("{label}.gmean_o={:.4}", entry.gmean_o));
    }
    write_report(out, &lines)
}

// ---------------------------------------------------------------------------
// plotdata
// ---------------------------------------------------------------------------

fn cmd_plotdata(
    input: &Path,
    annotations: &Path,
    fs: Option<f64>,
    out: &Path,
) -> DataResult<()> {
    let signal = io::read_signal(input, fs)?;
    let beats = io::read_annotations(annotations)?;
    check_annotation_bounds(&beats, &signal, annotations)?;

    let mut markers: Vec<String> = vec![String::new(); signal.len()];
    for beat in &beats {
        for (idx, label) in [(beat.b, "b"), (beat.c, "c"), (beat.x, "x"), (beat.o, "o")] {
            if let Some(i) = idx {
                markers[i].push_str(label);
            }
        }
    }
    let mut text = String::from("time_s,value,marker\n");
    for (i, v) in signal.samples.iter().enumerate() {
        text.push_str(&format!(
            "{:.6},{v:.6},{}\n",
            i as f64 / signal.fs,
            markers[i]
        ));
    }
    fs::write(out, text).map_err(|err| DataError(format!("cannot write {}: {err}", out.display())))
}
