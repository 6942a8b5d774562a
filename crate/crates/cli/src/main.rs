mod commands;
mod descriptor;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commands::{Outcome, SmoothcpArgs, TemperedArgs};
use ktorus_core::Error;
use report::RunReport;

const EXIT_INVALID: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

/// Invariants and numerical probes for crossed products by torus maps.
///
/// Map arguments take a JSON map file or a family descriptor: `ji:M,N`, `affine:K1,...`,
/// `rotation:LABEL,...`, `putnam:A,B`, `sine:A` or `point`.
#[derive(Parser, Serialize)]
#[command(name = "ktorus", version)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Grid points per axis for sup-norm estimates.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Largest modulus tried by the conjugacy search.
    #[arg(long, global = true, default_value_t = 16)]
    modcap: u64,
    /// Entry bound for the conjugacy box search.
    #[arg(long, global = true, default_value_t = 3)]
    bound: i64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// K-groups of the crossed product.
    Ktheory { map: String },
    /// Elliott invariants.
    #[command(subcommand)]
    Elliott(ElliottCommand),
    /// Growth of ρ_1(h^n) and its classification.
    Tempered(TemperedCli),
    /// Smooth crossed product probes.
    #[command(subcommand)]
    Smoothcp(SmoothcpCommand),
    /// Schweitzer algebra checks.
    #[command(subcommand)]
    Schweitzer(SchweitzerCommand),
    /// Similarity of integer matrices over Z, Q and Z/k.
    Conjugacy(ConjugacyCli),
    /// Orbits and averages.
    #[command(subcommand)]
    Dynamics(DynamicsCommand),
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum ElliottCommand {
    /// Compare the invariants of two maps.
    Compare {
        first: String,
        second: String,
        /// Identify same-named labels and treat the union as independent.
        #[arg(long)]
        union: bool,
        /// Rename a label of the second invariant, as `old=new`. Repeatable.
        #[arg(long)]
        rename: Vec<String>,
    },
}

#[derive(Args, Serialize)]
struct TemperedCli {
    map: String,
    /// Exact values from the affine lift.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 1)]
    from: u64,
    /// Largest n (default 1000 exact, 100 numeric, 50 for circle maps).
    #[arg(long)]
    to: Option<u64>,
    #[arg(long, default_value_t = 12)]
    samples: usize,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum SmoothcpCommand {
    /// Unit norms and the submultiplicativity probe.
    Bench {
        map: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long, default_value_t = 24)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        width: i64,
    },
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum SchweitzerCommand {
    /// Norm inequalities on random elements plus the reciprocal-sequence checks.
    Suite {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
    },
}

#[derive(Args, Serialize)]
struct ConjugacyCli {
    /// First matrix as JSON rows, e.g. "[[1,0],[1,1]]".
    a: Option<String>,
    b: Option<String>,
    /// Use the pair built from the skew parameters M and N.
    #[arg(long, num_args = 2, value_names = ["M", "N"], allow_negative_numbers = true)]
    ji: Option<Vec<i64>>,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum DynamicsCommand {
    /// The planar collapse map at one point.
    Collapse {
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
    },
    /// Orbit points, starting point included.
    Orbit {
        map: String,
        #[arg(long)]
        start: Option<String>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Birkhoff average of the character e(k·x).
    Ergodic {
        map: String,
        #[arg(long)]
        freq: String,
        #[arg(long)]
        start: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
    },
    /// Average lift increment of one coordinate, mod 1.
    Winding {
        map: String,
        #[arg(long, default_value_t = 0)]
        coord: usize,
        #[arg(long)]
        start: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
    },
    /// Smallest distance between two orbits over the second half of the horizon.
    Distality {
        map: String,
        #[arg(long)]
        z1: String,
        #[arg(long)]
        z2: String,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
    },
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Ktheory { map } => commands::ktheory(map),
        Command::Elliott(ElliottCommand::Compare {
            first,
            second,
            union,
            rename,
        }) => commands::elliott_compare(first, second, *union, rename),
        Command::Tempered(t) => commands::tempered(
            &t.map,
            &TemperedArgs {
                exact: t.exact,
                from: t.from,
                to: t.to,
                samples: t.samples,
                grid: cli.grid,
            },
        ),
        Command::Smoothcp(SmoothcpCommand::Bench {
            map,
            n,
            d,
            samples,
            width,
        }) => commands::smoothcp_bench(
            map,
            &SmoothcpArgs {
                n: *n,
                d: *d,
                samples: *samples,
                width: *width,
                grid: cli.grid,
                seed: cli.seed,
            },
        ),
        Command::Schweitzer(SchweitzerCommand::Suite { cases }) => commands::schweitzer_suite(cli.seed, *cases),
        Command::Conjugacy(c) => commands::conjugacy(
            c.a.as_deref(),
            c.b.as_deref(),
            c.ji.as_deref(),
            cli.bound,
            cli.modcap,
        ),
        Command::Dynamics(d) => match d {
            DynamicsCommand::Collapse { x, y } => commands::collapse(*x, *y),
            DynamicsCommand::Orbit { map, start, steps } => commands::orbit(map, start.as_deref(), *steps),
            DynamicsCommand::Ergodic {
                map,
                freq,
                start,
                steps,
            } => commands::ergodic(map, freq, start.as_deref(), *steps),
            DynamicsCommand::Winding {
                map,
                coord,
                start,
                steps,
            } => commands::winding(map, *coord, start.as_deref(), *steps),
            DynamicsCommand::Distality { map, z1, z2, horizon } => commands::distality(map, z1, z2, *horizon),
        },
    }
}

fn run(cli: &Cli) -> Result<()> {
    let started = Instant::now();
    let outcome = dispatch(cli)?;
    let command = serde_json::to_value(cli)?;
    let report = RunReport::new(command, outcome.results, outcome.notes);
    let text = report.render(started.elapsed().as_secs_f64());
    match &cli.out {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let resource = e
        .chain()
        .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::ResourceLimit(_))));
    if resource {
        EXIT_RESOURCE
    } else {
        EXIT_INVALID
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
