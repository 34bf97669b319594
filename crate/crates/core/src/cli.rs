//! The `triad-bell` command line.
//!
//! Exit codes: 0 on success, 2 for argument errors, 1 when a run fails or a
//! verification suite does not pass. `BELL_THREADS` caps the worker count;
//! results do not depend on it.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bipartite::{nonviolation_bound, violation_probability_integral, DEFAULT_RESOLUTION};
use crate::correlations::{NoiseLevel, TransverseWeight};
use crate::error::BellError;
use crate::experiments::{
    default_samples, estimate_probability_with, gamma_sweep, oracle_crosscheck_weighted,
    region_crosscheck, StateKind, SweepConfig, SweepRow,
};
use crate::mabk::tsirelson_threshold;

pub const THREADS_ENV: &str = "BELL_THREADS";

pub const CSV_HEADER: &str = "gamma,n_parties,samples,violations,p_hat,std_error";

#[derive(Debug, Parser)]
#[command(
    name = "triad-bell",
    version,
    about = "Bell violations from randomly oriented measurement triads"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Violation probability over an evenly spaced range of noise levels.
    Sweep(SweepArgs),
    /// Violation probability at a single noise level.
    Probability(ProbabilityArgs),
    /// Quadrature of the two-party violation region.
    Integral(IntegralArgs),
    /// Closed-form bound on the two-party non-violation probability.
    Bound(BoundArgs),
    /// Noise level below which no MABK inequality can be violated.
    Threshold(ThresholdArgs),
    /// Consistency suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StateArg {
    Auto,
    Singlet,
    Ghz,
}

impl From<StateArg> for StateKind {
    fn from(s: StateArg) -> Self {
        match s {
            StateArg::Auto => StateKind::Auto,
            StateArg::Singlet => StateKind::Singlet,
            StateArg::Ghz => StateKind::Ghz,
        }
    }
}

#[derive(Debug, Args)]
struct Output {
    /// Output file, or `-` for standard output.
    #[arg(long, default_value = "-")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    gamma_min: f64,
    #[arg(long)]
    gamma_max: f64,
    #[arg(long)]
    steps: usize,
    /// Samples per noise level (default depends on the party count).
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    state: StateArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ProbabilityArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    state: StateArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct IntegralArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long)]
    gamma: f64,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long)]
    n: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Suite {
    /// Closed-form tensors against the dense simulator.
    Oracle,
    /// Reduced two-party inequalities against the full labeling search.
    Region,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Random configurations per noise level (oracle) or pairs (region).
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Noise level for the region suite.
    #[arg(long, default_value_t = 0.98)]
    gamma: f64,
    /// Use the halved transverse GHZ weight (expected to fail).
    #[arg(long)]
    printed_coefficient: bool,
}

/// `%.{digits}g` formatting as in C.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Byte-stable CSV: fixed header, 12 significant digits, `\n` endings.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_sig(r.gamma, 12),
            r.n_parties,
            r.samples,
            r.violations,
            format_sig(r.p_hat, 12),
            format_sig(r.std_error, 12)
        );
    }
    out
}

pub fn rows_to_json(rows: &[SweepRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
    /// A verification suite ran but did not pass; its report is already out.
    Failed,
}

impl From<BellError> for Failure {
    fn from(e: BellError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn emit(output: &Output, body: &str) -> Result<(), Failure> {
    if output.out.as_os_str() == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Runtime(format!("writing output: {e}")))
    } else {
        std::fs::write(&output.out, body)
            .map_err(|e| Failure::Runtime(format!("writing {}: {e}", output.out.display())))
    }
}

fn render_rows(output: &Output, rows: &[SweepRow]) -> Result<(), Failure> {
    let body = match output.format {
        Format::Csv => rows_to_csv(rows),
        Format::Json => rows_to_json(rows),
    };
    emit(output, &body)
}

fn noise(gamma: f64) -> Result<NoiseLevel, Failure> {
    NoiseLevel::new(gamma).map_err(|e| Failure::Usage(format!("--gamma: {e}")))
}

#[derive(Serialize)]
struct IntegralRecord {
    gamma: f64,
    resolution: usize,
    p: f64,
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Sweep(a) => {
            let config = SweepConfig {
                n_parties: a.n,
                gamma_min: a.gamma_min,
                gamma_max: a.gamma_max,
                steps: a.steps,
                samples_per_point: a.samples.unwrap_or_else(|| default_samples(a.n)),
                seed: a.seed,
                state: a.state.into(),
            };
            config
                .validate()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let rows = gamma_sweep(&config)?;
            render_rows(&a.output, &rows)
        }
        Command::Probability(a) => {
            let samples = a.samples.unwrap_or_else(|| default_samples(a.n));
            if samples == 0 {
                return Err(Failure::Usage("--samples must be at least 1".into()));
            }
            let g = noise(a.gamma)?;
            let est = estimate_probability_with(a.n, g, samples, a.seed, a.state.into())?;
            let row = SweepRow {
                gamma: a.gamma,
                n_parties: a.n,
                samples,
                violations: (est.p_hat * samples as f64).round() as u64,
                p_hat: est.p_hat,
                std_error: est.std_error,
            };
            render_rows(&a.output, &[row])
        }
        Command::Integral(a) => {
            let p = violation_probability_integral(noise(a.gamma)?, a.resolution)?;
            let body = match a.output.format {
                Format::Csv => format!(
                    "gamma,resolution,p\n{},{},{}\n",
                    format_sig(a.gamma, 12),
                    a.resolution,
                    format_sig(p, 12)
                ),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&IntegralRecord {
                        gamma: a.gamma,
                        resolution: a.resolution,
                        p,
                    })
                    .expect("record serializes");
                    s.push('\n');
                    s
                }
            };
            emit(&a.output, &body)
        }
        Command::Bound(a) => {
            let b = nonviolation_bound(noise(a.gamma)?)?;
            println!("{b:.2e}");
            Ok(())
        }
        Command::Threshold(a) => {
            println!("{}", format_sig(tsirelson_threshold(a.n)?, 12));
            Ok(())
        }
        Command::Verify(a) => match a.suite {
            Suite::Oracle => {
                let weight = if a.printed_coefficient {
                    TransverseWeight::Half
                } else {
                    TransverseWeight::Exact
                };
                let trials = usize::try_from(a.trials)
                    .map_err(|_| Failure::Usage("--trials too large".into()))?;
                let report = oracle_crosscheck_weighted(a.n, trials, a.tol, a.seed, weight)?;
                print_json(&report);
                if report.passed {
                    Ok(())
                } else {
                    Err(Failure::Failed)
                }
            }
            Suite::Region => {
                let report = region_crosscheck(noise(a.gamma)?, a.trials, a.seed)?;
                print_json(&report);
                if report.counterexamples == 0 {
                    Ok(())
                } else {
                    Err(Failure::Failed)
                }
            }
        },
    }
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = thread_cap().and_then(|cap| match cap {
        None => execute(cli.command),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?
            .install(|| execute(cli.command)),
    });
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Failed) => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.0, 12), "0");
        assert_eq!(format_sig(1.0, 12), "1");
        assert_eq!(format_sig(0.84, 12), "0.84");
        assert_eq!(format_sig(0.85, 12), "0.85");
        assert_eq!(format_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_sig(2.0 / 3.0, 3), "0.667");
        assert_eq!(format_sig(8.41e-4, 12), "0.000841");
        assert_eq!(format_sig(1.5e-7, 12), "1.5e-07");
        assert_eq!(format_sig(123456789012345.0, 12), "1.23456789012e+14");
        assert_eq!(format_sig(-0.25, 12), "-0.25");
    }

    #[test]
    fn csv_layout() {
        let rows = [SweepRow {
            gamma: 0.9,
            n_parties: 2,
            samples: 10,
            violations: 7,
            p_hat: 0.7,
            std_error: (0.7f64 * 0.3 / 10.0).sqrt(),
        }];
        let csv = rows_to_csv(&rows);
        assert_eq!(
            csv,
            "gamma,n_parties,samples,violations,p_hat,std_error\n0.9,2,10,7,0.7,0.144913767462\n"
        );
    }

    #[test]
    fn argument_errors_exit_two() {
        assert_eq!(run_cli(["triad-bell", "bound", "--gamma", "abc"]), 2);
        assert_eq!(run_cli(["triad-bell", "bound"]), 2);
        assert_eq!(
            run_cli(["triad-bell", "bound", "--gamma", "0.99", "--bogus", "1"]),
            2
        );
        assert_eq!(run_cli(["triad-bell", "frobnicate"]), 2);
        assert_eq!(run_cli(["triad-bell", "bound", "--gamma", "1.5"]), 2);
    }

    #[test]
    fn runtime_errors_exit_one() {
        // Valid γ, but outside the range where the bound holds.
        assert_eq!(run_cli(["triad-bell", "bound", "--gamma", "0.5"]), 1);
        assert_eq!(run_cli(["triad-bell", "threshold", "--n", "1"]), 1);
    }

    #[test]
    fn simple_commands_succeed() {
        assert_eq!(run_cli(["triad-bell", "bound", "--gamma", "0.98"]), 0);
        assert_eq!(run_cli(["triad-bell", "threshold", "--n", "3"]), 0);
    }
}
