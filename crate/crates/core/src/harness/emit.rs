//! Result persistence: per-trial CSV plus summary and histogram side files,
//! or a single JSONL document. Output is byte-stable for a fixed config and
//! master seed (records are sorted by trial index and floats print in
//! shortest round-trip form).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::gaussian_cdf;

use super::run::{ExperimentResult, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

/// Path with the extension replaced by `suffix.csv`.
fn side_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

/// Writes the result. CSV produces three files: the per-trial table at
/// `path`, `<stem>.summary.csv`, and `<stem>.hist.csv`; JSONL produces a
/// single file with a header object followed by one object per trial.
pub fn emit_results(result: &ExperimentResult, format: OutputFormat, path: &Path) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            write_trials_csv(result, path)?;
            write_summary_csv(result, &side_path(path, "summary"))?;
            write_histogram_csv(result, &side_path(path, "hist"))?;
        }
        OutputFormat::Jsonl => write_jsonl(result, path)?,
    }
    Ok(())
}

fn write_trials_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "trial,seed,value,standardized")?;
    for r in &result.records {
        match r.standardized {
            Some(z) => writeln!(w, "{},{},{},{}", r.trial, r.seed, r.value, z)?,
            None => writeln!(w, "{},{},{},", r.trial, r.seed, r.value)?,
        }
    }
    w.flush()?;
    Ok(())
}

fn write_summary_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "statistic,value")?;
    writeln!(w, "trials,{}", result.config.trials)?;
    writeln!(w, "records,{}", result.records.len())?;
    writeln!(w, "sample_mean,{}", result.summary.sample_mean)?;
    writeln!(w, "sample_variance,{}", result.summary.sample_variance)?;
    if let Some(ks) = result.summary.ks_statistic {
        writeln!(w, "ks_statistic,{ks}")?;
    }
    for (name, value) in &result.summary.bound_values {
        writeln!(w, "{name},{value}")?;
    }
    writeln!(w, "master_seed,{}", result.manifest.master_seed)?;
    writeln!(w, "code_version,{}", result.manifest.code_version)?;
    w.flush()?;
    Ok(())
}

/// Histogram of the standardized column when every record carries one,
/// otherwise of the raw values; the reference density column is N(0, 1)
/// for standardized data and the moment-matched Gaussian otherwise.
fn write_histogram_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    let standardized: Option<Vec<f64>> = result
        .records
        .iter()
        .map(|r| r.standardized)
        .collect::<Option<Vec<f64>>>();
    let (data, mu, sigma) = match &standardized {
        Some(z) => (z.clone(), 0.0, 1.0),
        None => {
            let values: Vec<f64> = result.records.iter().map(|r| r.value).collect();
            let (mean, variance) = super::run::summarize_values(&values);
            (values, mean, variance.sqrt())
        }
    };
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "bin_left,bin_right,count,gaussian_density")?;
    if data.is_empty() {
        return Ok(());
    }
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = ((data.len() as f64).sqrt().round() as usize).clamp(10, 80);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &x in &data {
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    for (i, &count) in counts.iter().enumerate() {
        let left = lo + i as f64 * width;
        let right = lo + (i + 1) as f64 * width;
        let center = 0.5 * (left + right);
        let density = if sigma > 0.0 {
            let z = (center - mu) / sigma;
            (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        } else {
            0.0
        };
        writeln!(w, "{left},{right},{count},{density}")?;
    }
    w.flush()?;
    Ok(())
}

fn write_jsonl(result: &ExperimentResult, path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Header<'a> {
        config: &'a super::config::ExperimentConfig,
        summary: &'a super::run::Summary,
        manifest: &'a super::run::Manifest,
    }
    let mut w = BufWriter::new(File::create(path)?);
    let header = Header {
        config: &result.config,
        summary: &result.summary,
        manifest: &result.manifest,
    };
    writeln!(
        w,
        "{}",
        serde_json::to_string(&header).map_err(|e| Error::Internal(e.to_string()))?
    )?;
    for r in &result.records {
        writeln!(
            w,
            "{}",
            serde_json::to_string(r).map_err(|e| Error::Internal(e.to_string()))?
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back a per-trial CSV written by [`emit_results`].
pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        if line_no == 0 {
            if line != "trial,seed,value,standardized" {
                return Err(Error::Config(format!("unexpected CSV header: {line}")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Config(format!(
                "line {} has {} fields, expected 4",
                line_no + 1,
                fields.len()
            )));
        }
        let parse_err = |e: &dyn std::fmt::Display| Error::Config(format!("line {}: {e}", line_no + 1));
        records.push(TrialRecord {
            trial: fields[0].parse().map_err(|e: std::num::ParseIntError| parse_err(&e))?,
            seed: fields[1].parse().map_err(|e: std::num::ParseIntError| parse_err(&e))?,
            value: fields[2].parse().map_err(|e: std::num::ParseFloatError| parse_err(&e))?,
            standardized: if fields[3].is_empty() {
                None
            } else {
                Some(fields[3].parse().map_err(|e: std::num::ParseFloatError| parse_err(&e))?)
            },
        });
    }
    Ok(records)
}

/// Recomputes the mean/variance summary from persisted records; matches the
/// stored summary exactly because floats round-trip through the CSV.
pub fn recompute_summary(records: &[TrialRecord]) -> (f64, f64) {
    let values: Vec<f64> = records.iter().map(|r| r.value).collect();
    super::run::summarize_values(&values)
}

/// Standard-normal CDF helper shared by plotting consumers.
pub fn standard_normal_cdf(x: f64) -> f64 {
    gaussian_cdf(x, 0.0, 1.0).expect("unit sigma")
}

#[cfg(test)]
mod tests {
    use super::super::config::{ExperimentConfig, ExperimentKind, Truncations};
    use super::super::run::run_experiment;
    use super::*;
    use std::collections::BTreeMap;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            kind: ExperimentKind::Clt,
            n: 3,
            num_factors: 10,
            k: 1,
            truncations: Truncations::Uniform(2),
            trials: 64,
            master_seed: 11,
            convention: crate::stats::Convention::Corrected,
            constants: BTreeMap::new(),
            output_path: None,
            m: None,
            alpha: None,
            beta: None,
            eps: vec![],
            mode: None,
            workers: Some(2),
        }
    }

    #[test]
    fn csv_round_trip_reproduces_summary() {
        let result = run_experiment(&small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit_results(&result, OutputFormat::Csv, &path).unwrap();

        let records = read_trials_csv(&path).unwrap();
        assert_eq!(records, result.records);
        let (mean, variance) = recompute_summary(&records);
        assert_eq!(mean.to_bits(), result.summary.sample_mean.to_bits());
        assert_eq!(variance.to_bits(), result.summary.sample_variance.to_bits());

        assert!(side_path(&path, "summary").exists());
        assert!(side_path(&path, "hist").exists());
    }

    #[test]
    fn histogram_counts_sum_to_records() {
        let result = run_experiment(&small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit_results(&result, OutputFormat::Csv, &path).unwrap();
        let hist = std::fs::read_to_string(side_path(&path, "hist")).unwrap();
        let total: usize = hist
            .lines()
            .skip(1)
            .map(|line| line.split(',').nth(2).unwrap().parse::<usize>().unwrap())
            .sum();
        assert_eq!(total, result.records.len());
    }

    #[test]
    fn jsonl_has_header_then_records() {
        let result = run_experiment(&small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.jsonl");
        emit_results(&result, OutputFormat::Jsonl, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + result.records.len());
        let header: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert!(header.get("config").is_some());
        assert!(header.get("summary").is_some());
        let first: TrialRecord = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(first, result.records[0]);
    }

    #[test]
    fn emit_fails_on_unwritable_path() {
        let result = run_experiment(&small_config()).unwrap();
        let err = emit_results(
            &result,
            OutputFormat::Csv,
            Path::new("/nonexistent-dir/out.csv"),
        );
        assert!(matches!(err, Err(Error::Io(_))));
    }

    #[test]
    fn format_parses() {
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert_eq!("jsonl".parse::<OutputFormat>().unwrap(), OutputFormat::Jsonl);
        assert!("xml".parse::<OutputFormat>().is_err());
    }
}
