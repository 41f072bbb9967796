use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use sigma_reduce::pipeline::{self, Command, Options};
use sigma_reduce::problem::{Problem, ProblemFile};
use sigma_reduce::report::num;
use sigma_reduce::symmetry::Mode;
use sigma_reduce::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Check,
    SolveSigma,
    Prolong,
    Complete,
    Reduce,
    Constants,
    Theorem4,
    Integrate,
    Validate,
    /// Validate every problem file in a directory (default `corpus`).
    Corpus,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Strict,
    Orbital,
    Strong,
}

/// Verify sigma-symmetries of ODE systems and reduce them.
#[derive(Debug, Parser)]
#[command(name = "sigma-reduce", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// Problem file, or corpus directory for `corpus`.
    path: Option<PathBuf>,
    /// Symmetry test; overrides the problem file.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Sampler seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Sample points per numeric comparison.
    #[arg(long)]
    samples: Option<usize>,
    /// Relative tolerance of numeric comparisons.
    #[arg(long)]
    tol: Option<f64>,
    /// Integration horizon.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// RK4 step.
    #[arg(long)]
    step: Option<f64>,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write trajectories as CSV into this directory.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Keep a time-dependent system as given instead of adding `t` as a
    /// coordinate; symmetry commands then reject it.
    #[arg(long)]
    no_autonomize: bool,
}

impl Cli {
    fn options(&self) -> Options {
        Options {
            mode: self.mode.map(|m| match m {
                ModeArg::Strict => Mode::Strict,
                ModeArg::Orbital => Mode::Orbital,
                ModeArg::Strong => Mode::Strong,
            }),
            t_end: self.t_end,
            step: self.step,
            csv: self.csv.clone(),
        }
    }

    fn configure(&self, p: &mut Problem) {
        if let Some(s) = self.seed {
            p.domain.seed = s;
        }
        if let Some(n) = self.samples {
            p.domain.count = n;
        }
        if let Some(t) = self.tol {
            p.domain.tolerance = t;
        }
    }
}

fn command(c: Cmd) -> Option<Command> {
    Some(match c {
        Cmd::Check => Command::Check,
        Cmd::SolveSigma => Command::SolveSigma,
        Cmd::Prolong => Command::Prolong,
        Cmd::Complete => Command::Complete,
        Cmd::Reduce => Command::Reduce,
        Cmd::Constants => Command::Constants,
        Cmd::Theorem4 => Command::Theorem4,
        Cmd::Integrate => Command::Integrate,
        Cmd::Validate => Command::Validate,
        Cmd::Corpus => return None,
    })
}

fn write_out(path: &PathBuf, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Problem(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let opts = cli.options();
    let Some(cmd) = command(cli.command) else {
        let dir = cli.path.clone().unwrap_or_else(|| PathBuf::from("corpus"));
        let rows = pipeline::run_corpus(&dir, &opts, |p| cli.configure(p))?;
        let mut total = 0.0;
        let mut out = std::io::stdout().lock();
        for r in &rows {
            total += r.seconds;
            let detail = if r.failed.is_empty() {
                format!("{} stages", r.stages)
            } else {
                format!("failed: {}", r.failed.join(", "))
            };
            let _ = writeln!(
                out,
                "{:<20} {}  {:>9}s  {detail}",
                r.file,
                if r.passed { "pass" } else { "FAIL" },
                num(r.seconds)
            );
        }
        let passed = rows.iter().filter(|r| r.passed).count();
        let _ = writeln!(out, "{passed}/{} passed in {}s", rows.len(), num(total));
        return Ok(passed == rows.len());
    };
    let path = cli
        .path
        .as_ref()
        .ok_or_else(|| Error::Problem("missing problem file".into()))?;
    let pf = ProblemFile::load(path)?;
    let mut problem = Problem::compile(&pf, !cli.no_autonomize)?;
    cli.configure(&mut problem);
    problem.domain.validate()?;
    let report = pipeline::run(cmd, &problem, &opts)?;
    // A closed pipe downstream is not an error worth reporting.
    let _ = writeln!(std::io::stdout(), "{report}");
    if let Some(out) = &cli.out {
        write_out(out, &report.to_json())?;
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
