//! `rmtlab`: experiments on products of truncated Haar orthogonal matrices.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 a `--check` threshold
//! failed, 3 I/O error.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rmtlab_core::harness::{
    emit_results, run_experiment, ExperimentConfig, ExperimentKind, ExperimentResult,
    OutputFormat, Truncations,
};
use rmtlab_core::lyapunov::SpectrumMode;
use rmtlab_core::stats::Convention;
use rmtlab_core::weingarten::WeingartenTable;
use rmtlab_core::Error;

#[derive(Parser)]
#[command(name = "rmtlab", version, about = "Truncated orthogonal matrix product laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output path; CSV emits <path>, <stem>.summary.csv and <stem>.hist.csv
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or jsonl (default: inferred from the extension)
    #[arg(long)]
    format: Option<String>,
    /// Post-run threshold, e.g. `ks<=0.06`; failure exits with code 2
    #[arg(long)]
    check: Option<String>,
    /// Worker cap for this run (overrides RMTLAB_WORKERS)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a CLT experiment described by a JSON config
    Clt {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Two-sample check: frame growth at k=1 vs the telescoped log-Beta sum
    Identity {
        #[arg(long)]
        n: usize,
        /// Truncation depth shared by all factors
        #[arg(long)]
        l: usize,
        /// Number of factors in the product
        #[arg(long = "N")]
        num_factors: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Weingarten tables and their Monte Carlo verification
    Weingarten {
        #[command(subcommand)]
        command: WeingartenCommand,
    },
    /// Empirical Beta tails against the Bernstein-type bounds
    Tails {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        trials: usize,
        /// Comma-separated deviations, e.g. 0.1,0.2,0.3
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Lyapunov spectrum trials
    Lyapunov {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        #[arg(long = "N")]
        num_factors: usize,
        #[arg(long)]
        trials: usize,
        /// Top-k sum reported per trial
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// qr-accumulate or svd-rescale
        #[arg(long, default_value = "qr-accumulate")]
        mode: String,
        /// corrected or paper standardization
        #[arg(long, default_value = "corrected")]
        convention: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum WeingartenCommand {
    /// Dump the exact table for all matching pairs as CSV
    Table {
        #[arg(long)]
        k: usize,
        /// Ambient dimension
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare every tabulated pattern against Haar Monte Carlo
    Verify {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are success, anything else is usage.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 3,
        _ => 1,
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Clt { config, output } => {
            let mut cfg = ExperimentConfig::from_json_file(&config)?;
            if let Some(w) = output.workers {
                cfg.workers = Some(w);
            }
            run_and_report(cfg, &output)
        }
        Command::Identity {
            n,
            l,
            num_factors,
            trials,
            seed,
            output,
        } => {
            let cfg = base_config(
                ExperimentKind::IdentityCheck,
                n,
                l,
                num_factors,
                trials,
                seed,
                &output,
            );
            run_and_report(cfg, &output)
        }
        Command::Tails {
            alpha,
            beta,
            trials,
            eps,
            seed,
            output,
        } => {
            let mut cfg = base_config(ExperimentKind::Tails, 1, 1, 1, trials, seed, &output);
            cfg.alpha = Some(alpha);
            cfg.beta = Some(beta);
            cfg.eps = eps;
            run_and_report(cfg, &output)
        }
        Command::Lyapunov {
            n,
            l,
            num_factors,
            trials,
            k,
            mode,
            convention,
            seed,
            output,
        } => {
            let mut cfg = base_config(
                ExperimentKind::Lyapunov,
                n,
                l,
                num_factors,
                trials,
                seed,
                &output,
            );
            cfg.k = k;
            cfg.mode = Some(parse_mode(&mode)?);
            cfg.convention = parse_convention(&convention)?;
            run_and_report(cfg, &output)
        }
        Command::Weingarten { command } => match command {
            WeingartenCommand::Table { k, m, out } => {
                write_weingarten_table(k, m, &out)?;
                println!("wrote {}", out.display());
                Ok(ExitCode::SUCCESS)
            }
            WeingartenCommand::Verify {
                k,
                m,
                trials,
                seed,
                output,
            } => {
                let mut cfg =
                    base_config(ExperimentKind::WeingartenVerify, 0, 0, 0, trials, seed, &output);
                cfg.k = k;
                cfg.m = Some(m);
                run_and_report(cfg, &output)
            }
        },
    }
}

fn base_config(
    kind: ExperimentKind,
    n: usize,
    l: usize,
    num_factors: usize,
    trials: usize,
    seed: u64,
    output: &OutputArgs,
) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        n,
        num_factors,
        k: 1,
        truncations: Truncations::Uniform(l),
        trials,
        master_seed: seed,
        convention: Convention::Corrected,
        constants: BTreeMap::new(),
        output_path: output.out.clone(),
        m: None,
        alpha: None,
        beta: None,
        eps: vec![],
        mode: None,
        workers: output.workers,
    }
}

fn parse_mode(text: &str) -> Result<SpectrumMode, Error> {
    match text {
        "qr-accumulate" => Ok(SpectrumMode::QrAccumulate),
        "svd-rescale" => Ok(SpectrumMode::SvdRescale),
        other => Err(Error::Config(format!(
            "unknown mode '{other}' (expected qr-accumulate or svd-rescale)"
        ))),
    }
}

fn parse_convention(text: &str) -> Result<Convention, Error> {
    match text {
        "corrected" => Ok(Convention::Corrected),
        "paper" => Ok(Convention::Paper),
        other => Err(Error::Config(format!(
            "unknown convention '{other}' (expected corrected or paper)"
        ))),
    }
}

fn run_and_report(cfg: ExperimentConfig, output: &OutputArgs) -> Result<ExitCode, Error> {
    let result = run_experiment(&cfg)?;
    print_summary(&result);

    let path = output.out.clone().or(result.config.output_path.clone());
    if let Some(path) = path {
        let format = resolve_format(output.format.as_deref(), &path)?;
        emit_results(&result, format, &path)?;
        println!("wrote {}", path.display());
    }

    if let Some(check) = &output.check {
        let check = parse_check(check)?;
        let value = check_metric(&result, &check.metric)?;
        if check.holds(value) {
            println!("check passed: {} = {} ({})", check.metric, value, check);
        } else {
            println!("check FAILED: {} = {} violates {}", check.metric, value, check);
            return Ok(ExitCode::from(2));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn resolve_format(flag: Option<&str>, path: &Path) -> Result<OutputFormat, Error> {
    match flag {
        Some(text) => text.parse(),
        None => Ok(
            if path.extension().map(|e| e == "jsonl").unwrap_or(false) {
                OutputFormat::Jsonl
            } else {
                OutputFormat::Csv
            },
        ),
    }
}

fn print_summary(result: &ExperimentResult) {
    let s = &result.summary;
    println!(
        "trials={} records={} sample_mean={} sample_variance={}",
        result.config.trials,
        result.records.len(),
        s.sample_mean,
        s.sample_variance
    );
    if let Some(ks) = s.ks_statistic {
        println!("ks_statistic={ks}");
    }
    for (name, value) in &s.bound_values {
        println!("{name}={value}");
    }
    println!("wall_time_s={:.3}", result.manifest.wall_time_s);
}

struct Check {
    metric: String,
    less_equal: bool,
    threshold: f64,
}

impl Check {
    fn holds(&self, value: f64) -> bool {
        if self.less_equal {
            value <= self.threshold
        } else {
            value >= self.threshold
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let op = if self.less_equal { "<=" } else { ">=" };
        write!(f, "{}{}{}", self.metric, op, self.threshold)
    }
}

fn parse_check(text: &str) -> Result<Check, Error> {
    let (metric, less_equal, rest) = if let Some((m, r)) = text.split_once("<=") {
        (m, true, r)
    } else if let Some((m, r)) = text.split_once(">=") {
        (m, false, r)
    } else {
        return Err(Error::Config(format!(
            "check '{text}' must look like metric<=value or metric>=value"
        )));
    };
    let threshold: f64 = rest
        .parse()
        .map_err(|_| Error::Config(format!("check threshold '{rest}' is not a number")))?;
    Ok(Check {
        metric: metric.trim().to_string(),
        less_equal,
        threshold,
    })
}

fn check_metric(result: &ExperimentResult, metric: &str) -> Result<f64, Error> {
    if metric == "ks" {
        return result
            .summary
            .ks_statistic
            .ok_or_else(|| Error::Config("this experiment reports no KS statistic".into()));
    }
    if metric == "mean" {
        return Ok(result.summary.sample_mean);
    }
    if metric == "variance" {
        return Ok(result.summary.sample_variance);
    }
    result
        .summary
        .bound_values
        .get(metric)
        .copied()
        .ok_or_else(|| Error::Config(format!("unknown check metric '{metric}'")))
}

/// CSV dump of all matching pairs: matching_a, matching_b, loop count,
/// reduced coset type, Weingarten value.
fn write_weingarten_table(k: usize, m: usize, path: &Path) -> Result<(), Error> {
    let table = WeingartenTable::new(k, m)?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "matching_a,matching_b,loops,reduced_coset_type,value")
        .map_err(Error::from)?;
    let matchings = table.matchings();
    for a in 0..matchings.len() {
        for b in 0..matchings.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                matchings[a],
                matchings[b],
                table.loops(a, b),
                table.coset_type(a, b),
                table.value(a, b)
            )
            .map_err(Error::from)?;
        }
    }
    w.flush().map_err(Error::from)
}
