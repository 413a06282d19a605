use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twistor_core::random::{rng, Rng64};
use twistor_core::{Error, Signature};

mod fmt;
mod metric;
mod model;
mod rep;
mod report;
mod spinor;
mod tractor;

use report::{exit, CliError, CliResult, InputDigest, Outcome, RunReport};

const EXIT_CODES: &str = "\
Exit codes:
  0  success, every check passed
  1  internal error
  2  input error (bad flags, unreadable or malformed file, zero spinor, missing --seed)
  3  a check failed (report still written)
  4  unsupported signature for the requested operation";

#[derive(Parser, Debug)]
#[command(name = "twistor", version, about = "Clifford representations, Dirac forms, tractors and twistor spinors", after_help = EXIT_CODES)]
pub struct Cli {
    /// Seed for every sampling step; required by commands that sample.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the floating-point tolerance of numerical checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the JSON report (or generated artifact) to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the text summary.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a Clifford representation and check its relations.
    Rep(SigArgs),
    /// Analyze or generate spinors.
    #[command(subcommand)]
    Spinor(spinor::SpinorCmd),
    /// Algebraic Dirac forms and their kernel factorization.
    #[command(subcommand)]
    Form(spinor::FormCmd),
    /// Pointwise tractor calculus checks.
    #[command(subcommand)]
    Tractor(tractor::TractorCmd),
    /// Twistor spinors on the model S^p x S^q.
    #[command(subcommand)]
    Model(model::ModelCmd),
    /// Polynomial normal-form metrics.
    #[command(subcommand)]
    Metric(metric::MetricCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    /// eps = (-1, ..., -1, +1, ..., +1)
    Standard,
    /// eps_j = (-1)^j; real matrices, needs p = q or p = q + 1
    Alternating,
    /// eps_i = (-1)^i for i <= 2p, then +1; needs p <= q
    Adapted,
}

#[derive(Args, Debug, Clone)]
pub struct SigArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    q: usize,
    #[arg(long, value_enum, default_value_t = Convention::Standard)]
    convention: Convention,
}

impl SigArgs {
    pub fn signature(&self) -> CliResult<Signature> {
        let (p, q) = (self.p, self.q);
        let sig = match self.convention {
            Convention::Standard => Signature::standard(p, q)?,
            Convention::Adapted => Signature::adapted(p, q)?,
            Convention::Alternating => {
                let s = Signature::alternating(p + q)?;
                if s.p != p {
                    return Err(Error::InvalidSignature(format!("alternating convention in dimension {} has signature ({},{})", p + q, s.p, s.q)).into());
                }
                s
            }
        };
        Ok(sig)
    }
}

/// Global options and the inputs read so far.
pub struct Ctx {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub inputs: Vec<InputDigest>,
}

impl Ctx {
    pub fn rng(&self) -> CliResult<Rng64> {
        self.seed.map(rng).ok_or_else(|| CliError::Input("this command samples randomly; pass --seed".into()))
    }

    pub fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn read(&mut self, path: &std::path::Path) -> CliResult<String> {
        report::read_input(path, &mut self.inputs)
    }
}

/// A command either produces a report or a generated artifact (spinor, metric).
pub enum Produced {
    Report(Outcome),
    Artifact(serde_json::Value),
}

fn run(cli: &Cli, ctx: &mut Ctx) -> CliResult<Produced> {
    match &cli.command {
        Command::Rep(a) => rep::run(a).map(Produced::Report),
        Command::Spinor(c) => spinor::run_spinor(c, ctx),
        Command::Form(c) => spinor::run_form(c, ctx).map(Produced::Report),
        Command::Tractor(c) => tractor::run(c, ctx).map(Produced::Report),
        Command::Model(c) => model::run(c, ctx),
        Command::Metric(c) => metric::run(c, ctx),
    }
}

fn write_out(path: &Option<PathBuf>, text: &str) -> CliResult<()> {
    if let Some(p) = path {
        std::fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command: Vec<String> = std::env::args().skip(1).collect();
    let mut ctx = Ctx { seed: cli.seed, tol: cli.tol, inputs: Vec::new() };
    let produced = match run(&cli, &mut ctx) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("twistor: {e}");
            return ExitCode::from(e.code());
        }
    };
    let code = match produced {
        Produced::Artifact(v) => {
            let text = serde_json::to_string_pretty(&v).expect("serializable") + "\n";
            if cli.out.is_some() {
                if let Err(e) = write_out(&cli.out, &text) {
                    eprintln!("twistor: {e}");
                    return ExitCode::from(e.code());
                }
            } else {
                print!("{text}");
            }
            exit::OK
        }
        Produced::Report(outcome) => {
            let report = RunReport::new(command, ctx.inputs, ctx.seed, &outcome);
            let json = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
            if let Err(e) = write_out(&cli.out, &json) {
                eprintln!("twistor: {e}");
                return ExitCode::from(e.code());
            }
            if cli.json {
                print!("{json}");
            } else {
                print!("{}", report.text(&outcome.summary));
            }
            if report.status == report::Status::Pass {
                exit::OK
            } else {
                exit::CHECK_FAILED
            }
        }
    };
    ExitCode::from(code)
}
