//! Command surface: instance I/O, solver orchestration, and result emission.
//!
//! Exit codes: 0 = equilibrium found or mapping completed, 2 = usage or IO
//! error, 3 = certified non-existence of an equilibrium, 4 = inconclusive.
//! Non-existence is a successful scientific outcome, hence its own code.

mod commands;
mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_EQUILIBRIUM: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Parser)]
#[command(
    name = "pooleq",
    about = "Nash equilibria of competitive pooling markets: compute, certify, or refute",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Instance JSON (version 1). With --catalog adhya1-mod/bental5-mod this
    /// file supplies the base network.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Built-in instance name (see `pooleq demo --help` footer for the list).
    #[arg(long)]
    pub catalog: Option<String>,
    /// Comma list applied after loading: pt, nc, cont (strip fixed costs).
    #[arg(long)]
    pub mode_overrides: Option<String>,
    /// Warmstart seed; repeat for several.
    #[arg(long)]
    pub seed: Vec<u64>,
    /// Equilibrium tolerance (absolute, instance currency).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Relative optimality gap for the global solves.
    #[arg(long)]
    pub gap: Option<f64>,
    /// Master-problem time limit in seconds.
    #[arg(long)]
    pub rmp_time: Option<f64>,
    /// Subproblem time limit in seconds.
    #[arg(long)]
    pub sub_time: Option<f64>,
    /// Price grid step for mesh.
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Artifact directory (report.json, iterations.csv, mesh.csv, ...).
    #[arg(long, default_value = "pooleq_out")]
    pub out_dir: PathBuf,
    /// Worker threads for subproblem batches and grid cells.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve each player's own pooling problem at the market intercept
    /// prices (exact for perfectly elastic catalogs such as haverly-single).
    SolvePlayer(Common),
    /// Maximum-social-welfare heuristic with price recovery and verification.
    Welfare(Common),
    /// Monolithic Nash-Cournot heuristic with verification.
    MonoNc(Common),
    /// Cutting-plane minimum-disequilibrium run (the exact method).
    MinDiseq(Common),
    /// Map disequilibrium over a price grid.
    Mesh(Common),
    /// Nonlinear Jacobi best-response iteration from the shut-down profile.
    Jacobi(Common),
    /// Run the seeded warmstart procedure and report its candidate.
    Warmstart(Common),
    /// Re-verify the candidate stored in --out-dir/report.json.
    Verify(Common),
    /// Built-in demonstrations: diverging monolithic optima on box games and
    /// the knapsack stationarity gap.
    Demo(Common),
    /// Write a catalog instance as instance JSON.
    ExportInstance(Common),
}

/// Run the CLI against an argv (argv[0] is the program name). Returns the
/// process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders help/version on stdout with success; keep that
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let outcome = match cli.cmd {
        Cmd::SolvePlayer(c) => commands::solve_player(&c),
        Cmd::Welfare(c) => commands::welfare(&c),
        Cmd::MonoNc(c) => commands::mono_nc(&c),
        Cmd::MinDiseq(c) => commands::min_diseq(&c),
        Cmd::Mesh(c) => commands::mesh(&c),
        Cmd::Jacobi(c) => commands::jacobi(&c),
        Cmd::Warmstart(c) => commands::warmstart(&c),
        Cmd::Verify(c) => commands::verify(&c),
        Cmd::Demo(c) => commands::demo(&c),
        Cmd::ExportInstance(c) => commands::export_instance(&c),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
