//! `fps`: phase-point operators, Wigner grids, marginals and tomography from
//! the command line.

mod commands;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::ChannelKind;
use error::{exit, CliError};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  i/o or parse error
  2  bad arguments (including variant/dimension mismatch)
  3  invariant violation
  4  not a density matrix
  5  M not in SL(2, Z_N)
  6  variant precondition failed (not in L1, N/u odd, parity)
  7  incomplete cover of the frequency plane
  8  invalid channel shape
  9  inconsistent marginal data

Environment:
  FPS_TOLERANCE  numeric tolerance for checks (default 1e-9)";

#[derive(Parser, Debug)]
#[command(name = "fps", version, about = "Discrete Wigner functions and finite Radon tomography", after_help = EXIT_CODES)]
struct Cli {
    /// Print errors to stderr as JSON `{"error": {"code", "kind", "message"}}`.
    #[arg(long, global = true)]
    json_errors: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and verify a phase-point operator set; writes OUT and OUT.report.json.
    Gen {
        #[arg(long)]
        dim: usize,
        /// odd, even-nu or qubit-w1.
        #[arg(long)]
        variant: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Wigner grid of a state as CSV `x,z,w`.
    Wigner {
        #[arg(long)]
        state: PathBuf,
        /// Defaults to odd for odd N and qubit-w1 for N = 2^k.
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Accept any hermitian operator, not just density matrices.
        #[arg(long)]
        raw: bool,
    },
    /// Marginal of a state along the lines of M, optionally with simulated counts.
    Marginal {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        variant: Option<String>,
        /// Matrix entries a,b,c,d of M = (a b; c d).
        #[arg(long = "M", alias = "m", allow_hyphen_values = true)]
        m: String,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allow the general kernel when no simple or closed form applies.
        #[arg(long)]
        kernel: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a state from a directory of marginal files.
    Reconstruct {
        #[arg(long)]
        marginals: PathBuf,
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Write a JSON report (plan, residue, eigenvalues, errors) here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Known state to compare against.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Largest allowed disagreement of two lines at a shared frequency.
        #[arg(long)]
        consistency_tol: Option<f64>,
        /// Use exact `probs` even when sampled data is present.
        #[arg(long)]
        exact: bool,
    },
    /// Process matrix of a channel. The channel file holds an N^2 x N^2
    /// superoperator acting on row-major vectorised operators,
    /// vec(A)[i*N + j] = A[i][j], so that vec(U A U^+) = (U (x) conj U) vec(A).
    Process {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Print the Radon check deviation for a,b,c,d:a',b',c',d'.
        #[arg(long, allow_hyphen_values = true)]
        check: Option<String>,
    },
    /// Apply a channel file (row-major convention) to a matrix.
    Apply {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        raw: bool,
    },
    /// Seeded random density matrix.
    RandomState {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        pure: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a standard channel file.
    Channel {
        #[arg(long, value_enum)]
        kind: ChannelKind,
        #[arg(long)]
        dim: usize,
        /// Depolarizing strength.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Covering frequency lines and their measurement matrices.
    Plan {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cmd: Command) -> Result<String, CliError> {
    match cmd {
        Command::Gen { dim, variant, out } => commands::gen(dim, &variant, &out),
        Command::Wigner { state, variant, out, raw } => commands::wigner(&state, variant.as_deref(), &out, raw),
        Command::Marginal { state, variant, m, shots, seed, kernel, out } => {
            commands::marginal(commands::MarginalArgs {
                state: &state,
                variant: variant.as_deref(),
                m: &m,
                shots,
                seed,
                kernel,
                out: &out,
            })
        }
        Command::Reconstruct { marginals, variant, out, report, truth, consistency_tol, exact } => {
            commands::reconstruct(commands::ReconstructArgs {
                marginals: &marginals,
                variant: variant.as_deref(),
                out: &out,
                report: report.as_deref(),
                truth: truth.as_deref(),
                consistency_tol,
                exact,
            })
        }
        Command::Process { channel, variant, out, check } => {
            commands::process(&channel, variant.as_deref(), &out, check.as_deref())
        }
        Command::Apply { channel, state, out, raw } => commands::apply(&channel, &state, &out, raw),
        Command::RandomState { dim, seed, pure, out } => commands::random_state(dim, seed, pure, &out),
        Command::Channel { kind, dim, p, seed, out } => commands::channel(kind, dim, p, seed, &out),
        Command::Plan { dim, out } => commands::plan(dim, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                // --help / --version
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if json_errors {
                let body = serde_json::json!({
                    "error": { "code": exit::USAGE, "kind": "usage", "message": e.kind().to_string() }
                });
                eprintln!("{body}");
            } else {
                let _ = e.print();
            }
            return ExitCode::from(exit::USAGE as u8);
        }
    };
    match run(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if cli.json_errors {
                eprintln!("{}", e.to_json());
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.code() as u8)
        }
    }
}
