//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corridor_three::Effort;
use crate::error::Error;
use crate::scenario::{parse_scenario, ContactSchedule, Scenario, SolveReport};
use crate::sweeping::{simulate, write_trace_csv, SimConfig, SimWorld};
use crate::trajectory::{sample_times, PiecewiseTrajectory};
use crate::verify::{solve_scenario, verify};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "crowd-sweep",
    version,
    about = "Optimal controls for crowd-motion sweeping processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a scenario, optionally over a range of trade-off weights.
    Solve(SolveArgs),
    /// Solve over a range of trade-off weights.
    Sweep(SweepArgs),
    /// Run the catching-up integrator with fixed controls.
    Simulate(SimulateArgs),
    /// Compare the closed-form optimum with the integrator.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Result table destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the sampled optimal paths of the first row here.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Sampling step for --trajectory.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, value_enum, default_value_t = EffortArg::Quadratic)]
    effort: EffortArg,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// A:B:STEP
    #[arg(long)]
    tau_sweep: Option<TauRange>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// A:B:STEP
    #[arg(long)]
    tau_sweep: TauRange,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// One control per agent: v1[,v2[,v3]]
    #[arg(long, value_delimiter = ',', required = true)]
    controls: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EffortArg {
    Quadratic,
    Linear,
}

impl From<EffortArg> for Effort {
    fn from(e: EffortArg) -> Self {
        match e {
            EffortArg::Quadratic => Effort::Quadratic,
            EffortArg::Linear => Effort::Linear,
        }
    }
}

/// Inclusive range of τ values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl TauRange {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl FromStr for TauRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("expected A:B:STEP, got `{s}`"));
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{x}` is not a finite number"))
        };
        let range = TauRange {
            start: num(a)?,
            stop: num(b)?,
            step: num(c)?,
        };
        if !(range.step > 0.0) {
            return Err("sweep step must be positive".into());
        }
        if range.start > range.stop {
            return Err("sweep start exceeds stop".into());
        }
        if range.start < 0.0 {
            return Err("tau must be non-negative".into());
        }
        Ok(range)
    }
}

enum Failure {
    Usage(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Solver(e.to_string())
    }
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Solve(args) => tabulate(&args.config, args.tau_sweep, &args.output),
        Command::Sweep(args) => tabulate(&args.config, Some(args.tau_sweep), &args.output),
        Command::Simulate(args) => {
            let scenario = load(&args.config)?;
            let world = match &scenario {
                Scenario::Single(sc) => SimWorld::from_single(sc),
                Scenario::Corridor(sc) => SimWorld::from_corridor(sc),
            };
            let trace = simulate(&world, &args.controls, &SimConfig::new(args.h))?;
            let mut out = sink(args.out.as_deref())?;
            write_trace_csv(&trace, &mut out)?;
            out.flush()?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let scenario = load(&args.config)?;
            let report = verify(&scenario, args.h)?;
            for line in report.lines() {
                println!("{line}");
            }
            let passed = report.passed();
            println!("verdict: {}", if passed { "pass" } else { "FAIL" });
            Ok(if passed { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}

fn tabulate(config: &Path, sweep: Option<TauRange>, output: &OutputArgs) -> Result<u8, Failure> {
    let scenario = load(config)?;
    let taus = sweep.map_or_else(|| vec![scenario.tau()], |s| s.values());
    let reports = taus
        .iter()
        .map(|&tau| solve_scenario(&scenario.with_tau(tau), output.effort.into()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = sink(output.out.as_deref())?;
    emit_table(&reports, &mut out)?;
    out.flush()?;
    if let Some(path) = &output.trajectory {
        let horizon = match &scenario {
            Scenario::Single(sc) => sc.horizon,
            Scenario::Corridor(sc) => sc.horizon,
        };
        let mut w = sink(Some(path))?;
        write_trajectory_csv(&reports[0].trajectories, horizon, output.dt, &mut w)?;
        w.flush()?;
    }
    Ok(EXIT_OK)
}

/// Six fractional digits, exact ties to even, no negative zero.
pub fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn fmt_time(t: Option<f64>) -> String {
    t.map_or_else(|| "empty".into(), fmt6)
}

/// Result table, one row per report in the given order.
pub fn emit_table<W: Write>(reports: &[SolveReport], out: &mut W) -> crate::error::Result<()> {
    let Some(first) = reports.first() else {
        return Err(Error::InvalidValue {
            field: "reports",
            reason: "nothing to tabulate".into(),
        });
    };
    let header = match first.schedule {
        ContactSchedule::Single(_) => "tau,a,t_f,t_l,J",
        ContactSchedule::Two(_) => "tau,a1,a2,t_f12,J",
        ContactSchedule::Three(_) => "tau,a1,a2,a3,t_f12,t_f23,J",
    };
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for r in reports {
        let mut row = vec![fmt6(r.tau)];
        row.extend(r.controls.iter().map(|&a| fmt6(a)));
        match r.schedule {
            ContactSchedule::Single(s) => {
                row.push(fmt_time(s.t_f));
                row.push(fmt_time(s.t_l));
            }
            ContactSchedule::Two(s) => row.push(fmt_time(s.t_f12)),
            ContactSchedule::Three(s) => {
                row.push(fmt_time(s.t_f12));
                row.push(fmt_time(s.t_f23));
            }
        }
        row.push(fmt6(r.cost));
        text.push_str(&row.join(","));
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// `t, x1, y1, …` sampled every `dt` on `[0, horizon]`.
pub fn write_trajectory_csv<W: Write>(
    paths: &[PiecewiseTrajectory],
    horizon: f64,
    dt: f64,
    out: &mut W,
) -> io::Result<()> {
    let mut header = vec!["t".to_string()];
    for i in 1..=paths.len() {
        header.push(format!("x{i}"));
        header.push(format!("y{i}"));
    }
    writeln!(out, "{}", header.join(","))?;
    for t in sample_times(0.0, horizon, dt) {
        let mut row = vec![fmt6(t)];
        for p in paths {
            let x = p.position_at(t);
            row.push(fmt6(x.x));
            row.push(fmt6(x.y));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
