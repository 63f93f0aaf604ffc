//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing criterion,
//! 2 for invalid arguments or unreadable input files.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{continuous_limit_sweep, fidelity_report, klm_comparison, success_report, write_csv, ReportRow};
use crate::error::{Error, Result};
use crate::qstate::PureState;
use crate::spectrum::Spectrum;
use crate::teleport::{input_rng, ProtocolConfig, Teleporter};
use crate::verify::{self, Fault, VerifyOptions};

#[derive(Debug, Parser)]
#[command(
    name = "qudit-teleport",
    version,
    about = "Qudit teleportation with linear measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample seeded protocol runs and stream one JSON line per trial.
    Run(RunArgs),
    /// Success probability: closed form next to exhaustive enumeration.
    Exact(ConfigArgs),
    /// Mean squared fidelity including failed runs.
    Fidelity(ConfigArgs),
    /// KLM outcome count next to the linear-measurement count.
    Klm(KlmArgs),
    /// Discretization sweep toward the continuous success probability.
    Limit(LimitArgs),
    /// Recompute every headline number and report pass/fail.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

/// Where the input qudit comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    Flat,
    Random,
    File(PathBuf),
}

impl FromStr for InputSource {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "flat" => InputSource::Flat,
            "random" => InputSource::Random,
            path => InputSource::File(PathBuf::from(path)),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Twice the input half-width a.
    #[arg(long)]
    pub a2x: i64,
    /// Twice the ancilla half-width b.
    #[arg(long)]
    pub b2x: i64,
    /// `flat`, `random`, or a state JSON file.
    #[arg(long, default_value = "flat")]
    pub input: InputSource,
    /// Seed for the random input draw.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
}

#[derive(Debug, Clone, Args)]
pub struct KlmArgs {
    #[arg(long)]
    pub n: u64,
    /// Emit a row for every n up to this value.
    #[arg(long)]
    pub to: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    #[arg(long = "A")]
    pub input_extent: f64,
    #[arg(long = "B")]
    pub ancilla_extent: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub steps: Vec<f64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    FlipPhase,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

/// Validated settings for one configuration-based command.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub a2x: i64,
    pub b2x: i64,
    pub trials: u64,
    pub seed: u64,
    pub input: InputSource,
    pub format: Format,
}

impl RunSpec {
    pub fn new(config: &ConfigArgs, trials: u64) -> Result<Self> {
        if config.a2x < 0 || config.b2x < config.a2x {
            return Err(Error::InvalidArgument(format!(
                "need b2x >= a2x >= 0, got a2x = {}, b2x = {}",
                config.a2x, config.b2x
            )));
        }
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        Ok(RunSpec {
            a2x: config.a2x,
            b2x: config.b2x,
            trials,
            seed: config.seed,
            input: config.input.clone(),
            format: config.format,
        })
    }

    pub fn protocol(&self) -> Result<ProtocolConfig> {
        let a = Spectrum::from_doubled(self.a2x)?;
        let b = Spectrum::from_doubled(self.b2x)?;
        match &self.input {
            InputSource::Flat => ProtocolConfig::flat(a, b),
            InputSource::Random => ProtocolConfig::random(a, b, &mut input_rng(self.seed)),
            InputSource::File(path) => ProtocolConfig::new(a, b, PureState::load(path)?),
        }
    }
}

#[derive(Serialize)]
struct RunSummary {
    a2x: i64,
    b2x: i64,
    seed: u64,
    trials: u64,
    successes: u64,
    success_rate: f64,
    mean_fidelity_sq: f64,
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    summary: &'a RunSummary,
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_run(spec: &RunSpec, out: &mut dyn Write) -> Result<()> {
    let teleporter = Teleporter::new(spec.protocol()?);
    let mut successes = 0u64;
    let mut fidelity_sum = 0.0;
    for trial in 0..spec.trials {
        let record = teleporter.run_trial(spec.seed, trial);
        successes += record.success as u64;
        fidelity_sum += record.fidelity_sq;
        let line = record.trace_line(trial);
        match spec.format {
            Format::Json => {
                serde_json::to_writer(&mut *out, &line)?;
                writeln!(out)?;
            }
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().has_headers(trial == 0).from_writer(&mut *out);
                w.serialize(&line)?;
                w.flush()?;
            }
            Format::Pretty => writeln!(
                out,
                "trial {:>6}  Q = {:>5}  P = {:>5}  p = {:.6e}  {}  F² = {:.12}",
                trial,
                record.outcome.q_sum,
                record.outcome.p_diff,
                line.probability,
                if line.success { "success" } else { "failure" },
                line.fidelity_sq
            )?,
        }
    }
    let summary = RunSummary {
        a2x: spec.a2x,
        b2x: spec.b2x,
        seed: spec.seed,
        trials: spec.trials,
        successes,
        success_rate: successes as f64 / spec.trials as f64,
        mean_fidelity_sq: fidelity_sum / spec.trials as f64,
    };
    match spec.format {
        Format::Json => {
            serde_json::to_writer(&mut *out, &SummaryLine { summary: &summary })?;
            writeln!(out)?;
        }
        Format::Csv => writeln!(
            out,
            "# summary,a2x={},b2x={},seed={},trials={},successes={},success_rate={},mean_fidelity_sq={}",
            summary.a2x,
            summary.b2x,
            summary.seed,
            summary.trials,
            summary.successes,
            summary.success_rate,
            summary.mean_fidelity_sq
        )?,
        Format::Pretty => writeln!(
            out,
            "success rate {} ({} / {}), mean F² {}",
            summary.success_rate, summary.successes, summary.trials, summary.mean_fidelity_sq
        )?,
    }
    Ok(())
}

fn cmd_exact(spec: &RunSpec, out: &mut dyn Write) -> Result<()> {
    let teleporter = Teleporter::new(spec.protocol()?);
    let report = success_report(&teleporter);
    match spec.format {
        Format::Json => write_json(&report, out),
        Format::Csv => write_csv(&[ReportRow::new(&report, &fidelity_report(&teleporter))], out),
        Format::Pretty => {
            writeln!(out, "a = {}, b = {}", report.a, report.b)?;
            for row in &report.p_of_q {
                writeln!(out, "  p(Q = {:>5}) = {}", row.q_sum, row.p)?;
            }
            writeln!(out, "P (closed form sum) = {}", report.p_success)?;
            writeln!(out, "P (enumeration)     = {}", report.p_engine)?;
            writeln!(out, "1 - 2a/(2b+1)       = {}", report.p_formula)?;
            Ok(())
        }
    }
}

fn cmd_fidelity(spec: &RunSpec, out: &mut dyn Write) -> Result<()> {
    let teleporter = Teleporter::new(spec.protocol()?);
    let report = fidelity_report(&teleporter);
    match spec.format {
        Format::Json => write_json(&report, out),
        Format::Csv => write_csv(&[ReportRow::new(&success_report(&teleporter), &report)], out),
        Format::Pretty => {
            writeln!(out, "a = {}, b = {}", report.a, report.b)?;
            for row in &report.per_q {
                writeln!(
                    out,
                    "  Q = {:>5}  p = {:.12}  |<Γ|Ψ>|² = {:.12}  {}",
                    row.q_sum,
                    row.p,
                    row.overlap * row.overlap,
                    if row.success { "success" } else { "failure" }
                )?;
            }
            writeln!(out, "mean F             = {}", report.mean_f)?;
            writeln!(out, "mean F (normalized) = {}", report.mean_f_normalized)?;
            Ok(())
        }
    }
}

fn cmd_klm(args: &KlmArgs, out: &mut dyn Write) -> Result<()> {
    let last = args.to.unwrap_or(args.n);
    if last < args.n {
        return Err(Error::InvalidArgument(format!("--to {last} is below --n {}", args.n)));
    }
    let rows: Vec<_> = (args.n..=last).map(klm_comparison).collect();
    match args.format {
        Format::Json if args.to.is_none() => write_json(&rows[0], out),
        Format::Json => write_json(&rows, out),
        Format::Csv => write_csv(&rows, out),
        Format::Pretty => {
            for row in &rows {
                let linear = row.linear.map_or_else(|| "-".to_string(), |l| l.to_string());
                writeln!(out, "n = {:>3}  N_KLM = {}  N_linear = {}", row.n, row.klm, linear)?;
            }
            Ok(())
        }
    }
}

fn cmd_limit(args: &LimitArgs, out: &mut dyn Write) -> Result<()> {
    let points = continuous_limit_sweep(args.input_extent, args.ancilla_extent, &args.steps)?;
    match args.format {
        Format::Json => write_json(&points, out),
        Format::Csv => write_csv(&points, out),
        Format::Pretty => {
            for p in &points {
                writeln!(
                    out,
                    "ε = {:<8} a2x = {:>4} b2x = {:>4}  P = {:.12}  gap = {:.3e}  bound = {:.3e}",
                    p.step, p.a2x, p.b2x, p.p_disc, p.gap, p.bound
                )?;
            }
            Ok(())
        }
    }
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<bool> {
    let options = VerifyOptions {
        quick: args.quick,
        seed: args.seed,
        fault: args.inject_fault.map(|FaultArg::FlipPhase| Fault::FlipCorrectionPhase),
    };
    let results = verify::run(options);
    for r in &results {
        writeln!(out, "{r}")?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(out, "{} of {} criteria passed", results.len() - failed, results.len())?;
    Ok(failed == 0)
}

/// Parse `args` (including the program name) and run, writing to the given
/// streams. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => RunSpec::new(&a.config, a.trials)
            .and_then(|s| cmd_run(&s, out))
            .map(|_| true),
        Command::Exact(c) => RunSpec::new(c, 1).and_then(|s| cmd_exact(&s, out)).map(|_| true),
        Command::Fidelity(c) => RunSpec::new(c, 1).and_then(|s| cmd_fidelity(&s, out)).map(|_| true),
        Command::Klm(a) => cmd_klm(a, out).map(|_| true),
        Command::Limit(a) => cmd_limit(a, out).map(|_| true),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

pub fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let code = run(std::env::args_os(), &mut out, &mut std::io::stderr());
    if out.flush().is_err() {
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn invoke(args: &[&str]) -> (u8, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("qudit-teleport").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn trivial_run_always_succeeds() {
        let (code, out, _) = invoke(&["run", "--a2x", "0", "--b2x", "0", "--trials", "10"]);
        assert_eq!(code, 0);
        let last: serde_json::Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
        assert_eq!(last["summary"]["success_rate"], 1.0);
        assert_eq!(out.lines().count(), 11);
    }

    #[test]
    fn invalid_spec_exits_two() {
        assert_eq!(invoke(&["exact", "--a2x", "3", "--b2x", "1"]).0, 2);
        assert_eq!(invoke(&["run", "--a2x", "1", "--b2x", "1", "--trials", "0"]).0, 2);
        assert_eq!(invoke(&["exact", "--a2x", "1"]).0, 2);
        assert_eq!(
            invoke(&["exact", "--a2x", "1", "--b2x", "1", "--input", "/nonexistent.json"]).0,
            2
        );
        assert_eq!(invoke(&["klm", "--n", "5", "--to", "2"]).0, 2);
    }

    #[test]
    fn csv_and_json_agree_on_run() {
        let base = [
            "run", "--a2x", "1", "--b2x", "3", "--trials", "20", "--seed", "4", "--input", "random",
        ];
        let (_, json, _) = invoke(&[&base[..], &["--format", "json"]].concat());
        let (_, csv_text, _) = invoke(&[&base[..], &["--format", "csv"]].concat());
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(csv_text.as_bytes());
        let rows: Vec<crate::teleport::TraceLine> = reader.deserialize().map(|r| r.unwrap()).collect();
        let lines: Vec<crate::teleport::TraceLine> = json
            .lines()
            .take(20)
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(rows, lines);
    }
}
