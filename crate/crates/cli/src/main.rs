//! `sctx`: exact computations with simplicial distributions from the command line.

mod commands;
mod inputs;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use inputs::{Failure, Inputs};
use report::RunReport;

#[derive(Parser, Debug)]
#[command(name = "sctx", version, about = "Simplicial distributions: contextuality, vertices, Bell inequalities")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Build and check scenarios.
    Scenario {
        #[command(subcommand)]
        cmd: ScenarioCmd,
    },
    /// Simplicial distributions on a scenario.
    Dist {
        #[command(subcommand)]
        cmd: DistCmd,
    },
    /// Vertices of the polytope of simplicial distributions.
    Polytope {
        #[command(subcommand)]
        cmd: PolytopeCmd,
    },
    /// Bell inequalities.
    Bell {
        #[command(subcommand)]
        cmd: BellCmd,
    },
    /// Complete collections and contextual vertices on suspensions.
    Factory {
        #[command(subcommand)]
        cmd: FactoryCmd,
    },
    /// Exact linear systems.
    Solve {
        #[command(subcommand)]
        cmd: SolveCmd,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Kind {
    Point,
    Line,
    Cycle,
}

#[derive(Subcommand, Debug)]
pub enum ScenarioCmd {
    /// A point, a line `L^(n)` or a cycle of `n` edges.
    New {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long)]
        m: Option<u32>,
    },
    Cone {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "c")]
        apex: String,
    },
    Suspend {
        #[arg(long)]
        scenario: PathBuf,
    },
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Over {
    Cone,
    Suspension,
}

#[derive(Subcommand, Debug)]
pub enum DistCmd {
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        dist: PathBuf,
    },
    /// Decide contextuality with an exact certificate.
    Contextual {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        dist: PathBuf,
    },
    /// Rank test for being a vertex.
    Vertex {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        dist: PathBuf,
    },
    /// Join decomposition of a distribution on the cone or suspension of `--base`.
    Decompose {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, value_enum, default_value = "cone")]
        over: Over,
        #[arg(long, default_value = "c")]
        apex: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum PolytopeCmd {
    Vertices {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        m: Option<u32>,
    },
    Vsupp {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        dist: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum BellCmd {
    /// A named family; only `chsh` is built in.
    Family {
        #[arg(long, default_value = "chsh")]
        name: String,
    },
    /// Lift a family on `X` to the cone of `X`.
    Lift {
        /// `chsh` or a path to a JSON list of inequalities.
        #[arg(long, default_value = "chsh")]
        family: String,
        #[arg(long, default_value_t = 2)]
        m: u32,
        /// Base scenario (defaults to the CHSH cycle).
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value = "c")]
        apex: String,
    },
    Evaluate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, default_value = "chsh")]
        family: String,
    },
    /// Check that a family characterizes noncontextuality on vertices and random points.
    Check {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value = "chsh")]
        family: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Example {
    ThreeWay,
    PureLine,
    PrClass2,
    AverageLine,
}

#[derive(Subcommand, Debug)]
pub enum FactoryCmd {
    ValidateCollection {
        #[arg(long)]
        collection: PathBuf,
    },
    /// Build a certified contextual vertex on a suspension.
    SuspensionVertex {
        #[arg(long, value_enum, conflicts_with = "input")]
        example: Option<Example>,
        /// JSON construction input.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Deterministic collection for the pure-line example.
        #[arg(long)]
        collection: Option<PathBuf>,
        /// Modulus for the built-in pure-line and average-line examples.
        #[arg(long, default_value_t = 3)]
        m: u32,
    },
}

#[derive(Subcommand, Debug)]
pub enum SolveCmd {
    /// Uniqueness of the weights fixed by a complete collection.
    Uniqueness {
        #[arg(long)]
        collection: PathBuf,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let outcome = commands::execute(&cli.cmd, &mut inputs);
    let mut report = RunReport {
        command: argv.iter().skip(1).cloned().collect(),
        inputs: inputs.digests,
        seed: match &cli.cmd {
            Cmd::Bell { cmd: BellCmd::Check { seed, .. } } => Some(*seed),
            _ => None,
        },
        status: "ok".into(),
        result: None,
        error: None,
        timing_ms: None,
    };
    let code = match outcome {
        Ok(v) => {
            report.result = Some(v);
            0
        }
        Err(f) => {
            eprintln!("sctx: {}", f.message());
            report.error = Some(f.message().to_string());
            match f {
                Failure::Validation(_) => {
                    report.status = "validation-error".into();
                    2
                }
                Failure::Internal(_) => {
                    report.status = "internal-error".into();
                    1
                }
            }
        }
    };
    if cli.timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    let text = report.to_json();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("sctx: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}
