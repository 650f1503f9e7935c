use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use entangraph::cli::{self, TeleportArgs};
use entangraph::tensor;

#[derive(Parser)]
#[command(
    name = "entangraph",
    version,
    about = "Entanglement polynomials, virtual-node graphs, and exact GHZ-channel teleportation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a state: transpose sweep, entanglement polynomial, graph.
    Analyze {
        /// State spec: ghz:N | psi34 | qubit:THETA,PHI | file:PATH
        spec: String,
        /// Directory for report.json, graph.dot, graph.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Teleport a qubit over a shared channel, tracking state and graph.
    Teleport {
        /// Channel spec (ghz:N)
        #[arg(long)]
        channel: String,
        /// Input qubit polar angle θ in [0, π]
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        /// Input qubit azimuthal angle φ in [0, 2π)
        #[arg(long, default_value_t = 0.5)]
        phi: f64,
        /// Rotated-basis angle ω in (0, π/2)
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        omega: f64,
        /// pairwise | sequential-rotations | hybrid:K
        #[arg(long, default_value = "pairwise")]
        strategy: String,
        /// enumerate | sample
        #[arg(long, default_value = "enumerate")]
        mode: String,
        /// Seed for sample mode
        #[arg(long)]
        seed: Option<u64>,
        /// exact | paper
        #[arg(long, default_value = "exact")]
        corrections: String,
        /// Directory for trace.json and per-stage DOT files
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the built-in reference matrices and spectra.
    VerifyAppendix {
        /// File for the JSON report
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert an entanglement polynomial (e.g. abc+ad+be) to DOT/JSON.
    ExportGraph {
        polynomial: String,
        /// Directory for graph.dot and graph.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    if let Ok(value) = std::env::var("ENTANGRAPH_DIM_CAP") {
        match value.parse::<usize>() {
            Ok(cap) => tensor::set_dim_cap(cap),
            Err(_) => {
                eprintln!("error: ENTANGRAPH_DIM_CAP must be a positive integer, got `{value}`");
                return ExitCode::from(2);
            }
        }
    }

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { spec, out } => cli::cmd_analyze(&spec, out.as_deref()),
        Command::Teleport {
            channel,
            theta,
            phi,
            omega,
            strategy,
            mode,
            seed,
            corrections,
            out,
        } => {
            let args = TeleportArgs {
                channel,
                theta,
                phi,
                omega,
                strategy,
                mode,
                seed,
                corrections,
            };
            cli::cmd_teleport(&args, out.as_deref())
        }
        Command::VerifyAppendix { out } => cli::cmd_verify_appendix(out.as_deref()),
        Command::ExportGraph { polynomial, out } => {
            cli::cmd_export_graph(&polynomial, out.as_deref())
        }
    };

    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(cli::exit_code_for(&error) as u8)
        }
    }
}
