//! Plain-text file formats shared by every subcommand.
//!
//! Three shapes cover everything:
//! - signal files: delimited text, either `time_s,value` rows (the rate is
//!   inferred from the time column) or a single `value` column with the
//!   rate supplied on the command line;
//! - annotation files: one row per beat, columns `b,c,x,o` holding sample
//!   indices, empty cells for absent points;
//! - configuration and report files: flat `key=value` lines, `#` comments.
//!
//! A first line that does not parse as numbers is treated as a header and
//! skipped, so the formats round-trip through the writers below.

use std::fmt;
use std::fs;
use std::path::Path;

use icg_core::signal::{BeatAnnotation, DelineationParams, Signal};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// A file-level problem. The message always names the offending path, so
/// the one-line diagnostic printed by `main` is actionable on its own.
#[derive(Debug)]
pub struct DataError(pub String);

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type DataResult<T> = Result<T, DataError>;

fn fail<T>(msg: String) -> DataResult<T> {
    Err(DataError(msg))
}

// ---------------------------------------------------------------------------
// Line-level helpers
// ---------------------------------------------------------------------------

/// Splits a delimited row into trimmed fields. Commas are the canonical
/// separator; semicolons and tabs are accepted for interop.
fn split_fields(line: &str) -> Vec<&str> {
    line.split([',', ';', '\t']).map(str::trim).collect()
}

/// Non-blank, non-comment lines of a text file.
fn data_lines(path: &Path) -> DataResult<Vec<(usize, String)>> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => return fail(format!("cannot read {}: {err}", path.display())),
    };
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

/// True when every field of the row parses as a number (empty cells count
/// as numeric so that annotation rows with absent points are not mistaken
/// for headers).
fn looks_numeric(line: &str) -> bool {
    split_fields(line)
        .iter()
        .all(|f| f.is_empty() || f.parse::<f64>().is_ok())
}

// ---------------------------------------------------------------------------
// Signal files
// ---------------------------------------------------------------------------

/// Reads a signal file. `fs_flag` is required for single-column files and
/// overrides the inferred rate for two-column ones.
pub fn read_signal(path: &Path, fs_flag: Option<f64>) -> DataResult<Signal> {
    let mut lines = data_lines(path)?;
    if !lines.is_empty() && !looks_numeric(&lines[0].1) {
        lines.remove(0); // header
    }
    if lines.is_empty() {
        return fail(format!("{} contains no samples", path.display()));
    }

    let width = split_fields(&lines[0].1).len();
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in &lines {
        let fields = split_fields(line);
        if fields.len() != width {
            return fail(format!(
                "{} line {lineno}: expected {width} columns, found {}",
                path.display(),
                fields.len()
            ));
        }
        let parse = |f: &str| -> DataResult<f64> {
            f.parse::<f64>().map_err(|_| {
                DataError(format!("{} line {lineno}: '{f}' is not a number", path.display()))
            })
        };
        match width {
            1 => values.push(parse(fields[0])?),
            2 => {
                times.push(parse(fields[0])?);
                values.push(parse(fields[1])?);
            }
            _ => {
                return fail(format!(
                    "{} line {lineno}: signal files have 1 or 2 columns, found {width}",
                    path.display()
                ))
            }
        }
    }

    let fs = match (width, fs_flag) {
        (_, Some(fs)) if fs > 0.0 => fs,
        (_, Some(fs)) => return fail(format!("--fs must be positive, got {fs}")),
        (1, None) => {
            return fail(format!(
                "{} is single-column; --fs is required to interpret it",
                path.display()
            ))
        }
        (_, None) => {
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return fail(format!(
                    "{}: time column must be strictly increasing",
                    path.display()
                ));
            }
            let span = times[times.len() - 1] - times[0];
            if times.len() < 2 || span <= 0.0 {
                return fail(format!(
                    "{}: cannot infer the sampling rate from fewer than two samples",
                    path.display()
                ));
            }
            (times.len() - 1) as f64 / span
        }
    };
    Ok(Signal::new(values, fs))
}

/// Writes a two-column `time_s,value` signal file.
pub fn write_signal(path: &Path, signal: &Signal) -> DataResult<()> {
    let mut out = String::from("time_s,value\n");
    for (i, v) in signal.samples.iter().enumerate() {
        out.push_str(&format!("{:.6},{v:.6}\n", i as f64 / signal.fs));
    }
    fs::write(path, out).map_err(|err| DataError(format!("cannot write {}: {err}", path.display())))
}

// ---------------------------------------------------------------------------
// Annotation files
// ---------------------------------------------------------------------------

/// Reads a `b,c,x,o` annotation table (sample indices, empty = absent).
pub fn read_annotations(path: &Path) -> DataResult<Vec<BeatAnnotation>> {
    let mut lines = data_lines(path)?;
    if !lines.is_empty() && !looks_numeric(&lines[0].1) {
        lines.remove(0);
    }
    let mut beats = Vec::new();
    for (lineno, line) in &lines {
        let fields = split_fields(line);
        if fields.len() != 4 {
            return fail(format!(
                "{} line {lineno}: annotation rows have 4 columns (b,c,x,o), found {}",
                path.display(),
                fields.len()
            ));
        }
        let cell = |f: &str| -> DataResult<Option<usize>> {
            if f.is_empty() {
                return Ok(None);
            }
            f.parse::<usize>().map(Some).map_err(|_| {
                DataError(format!(
                    "{} line {lineno}: '{f}' is not a sample index",
                    path.display()
                ))
            })
        };
        beats.push(BeatAnnotation {
            b: cell(fields[0])?,
            c: cell(fields[1])?,
            x: cell(fields[2])?,
            o: cell(fields[3])?,
            ..Default::default()
        });
    }
    Ok(beats)
}

/// Writes a `b,c,x,o` annotation table.
pub fn write_annotations(path: &Path, beats: &[BeatAnnotation]) -> DataResult<()> {
    let mut out = String::from("b,c,x,o\n");
    for beat in beats {
        let cell = |v: Option<usize>| v.map(|i| i.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            cell(beat.b),
            cell(beat.c),
            cell(beat.x),
            cell(beat.o)
        ));
    }
    fs::write(path, out).map_err(|err| DataError(format!("cannot write {}: {err}", path.display())))
}

// ---------------------------------------------------------------------------
// Key=value configuration
// ---------------------------------------------------------------------------

/// Reads `key=value` pairs in file order.
pub fn read_kv(path: &Path) -> DataResult<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, line) in data_lines(path)? {
        match line.split_once('=') {
            Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
            None => {
                return fail(format!(
                    "{} line {lineno}: expected key=value, found '{line}'",
                    path.display()
                ))
            }
        }
    }
    Ok(pairs)
}

/// Applies a parameter configuration file on top of `base`. Every key must
/// name a detection-parameter field and hold one number; the combined set
/// must pass validation.
pub fn read_params(path: &Path, base: &DelineationParams) -> DataResult<DelineationParams> {
    let mut params = base.clone();
    for (key, value) in read_kv(path)? {
        let number: f64 = value.parse().map_err(|_| {
            DataError(format!("{}: {key}: '{value}' is not a number", path.display()))
        })?;
        params
            .set_field(&key, number)
            .map_err(|err| DataError(format!("{}: {err}", path.display())))?;
    }
    params
        .validate()
        .map_err(|err| DataError(format!("{}: {err}", path.display())))?;
    Ok(params)
}

// ---------------------------------------------------------------------------
