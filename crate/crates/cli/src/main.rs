mod commands;
mod document;
mod problem_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::CliError;

#[derive(Parser)]
#[command(name = "superlat", version, about = "Anchor-graded decomposition and integral isometry search")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct AnchorArgs {
    /// Anchor vector, e.g. `1,0,0,0`; overrides the file's `w` block.
    #[arg(long, allow_hyphen_values = true)]
    w: Option<String>,
    /// Use the smallest-norm standard basis vector when no `w` is given.
    #[arg(long)]
    suggest_w: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Split φ into (φ₀, wt, a, b) and check the reassembly.
    Decompose {
        file: PathBuf,
        #[command(flatten)]
        anchor: AnchorArgs,
        /// File holding φ as n rows; overrides the file's `phi` block.
        #[arg(long)]
        phi: Option<PathBuf>,
        /// Write the result document here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print bases of the even and odd components.
    GradeBasis {
        file: PathBuf,
        #[command(flatten)]
        anchor: AnchorArgs,
    },
    /// Search for M with MᵀBM = B′.
    Factorize {
        file: PathBuf,
        #[command(flatten)]
        anchor: AnchorArgs,
        /// Emit every candidate (default).
        #[arg(long, conflicts_with = "first")]
        all: bool,
        /// Stop at the first integral candidate.
        #[arg(long)]
        first: bool,
        #[arg(long)]
        integral_only: bool,
        /// Skip third-equation values ruled out by Cauchy–Schwarz.
        #[arg(long)]
        cs_prune: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Sum-of-squares obstruction for a parametrised family or a bare number.
    Obstruct {
        #[arg(long, value_enum, conflicts_with = "value")]
        family: Option<Family>,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
        /// Scan the rank-3 family over `LO..HI` (inclusive) instead.
        #[arg(long, requires = "family")]
        scan: Option<String>,
        #[arg(long = "N", id = "value", allow_hyphen_values = true, requires = "squares")]
        value: Option<String>,
        #[arg(long, value_parser = ["2", "3"], requires = "value")]
        squares: Option<String>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Brute-force integral isometries column by column.
    Oracle {
        file: PathBuf,
        /// Coordinate bound for the column box; default enumerates exact norms.
        #[arg(long)]
        bound: Option<u32>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Re-check a result document.
    Verify { result: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Rank2,
    Rank3,
    Rank3Variant,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SUPERLAT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Parse(format!("SUPERLAT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Invariant(e.to_string()))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    match cli.command {
        Cmd::Decompose { file, anchor, phi, json } => {
            commands::decompose(&file, anchor.w.as_deref(), anchor.suggest_w, phi.as_deref(), json.as_deref())
        }
        Cmd::GradeBasis { file, anchor } => commands::grade_basis(&file, anchor.w.as_deref(), anchor.suggest_w),
        Cmd::Factorize {
            file,
            anchor,
            all: _,
            first,
            integral_only,
            cs_prune,
            json,
        } => commands::factorize(
            &file,
            anchor.w.as_deref(),
            anchor.suggest_w,
            commands::FactorizeFlags {
                first,
                integral_only,
                cs_prune,
            },
            json.as_deref(),
        ),
        Cmd::Obstruct {
            family,
            m,
            n,
            alpha,
            beta,
            gamma,
            scan,
            value,
            squares,
            json,
        } => {
            let family = family.map(|f| match f {
                Family::Rank2 => "rank2",
                Family::Rank3 => "rank3",
                Family::Rank3Variant => "rank3-variant",
            });
            let named = [("m", m), ("n", n), ("alpha", alpha), ("beta", beta), ("gamma", gamma)];
            let params = named
                .into_iter()
                .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
                .collect();
            commands::obstruct(family, params, scan.as_deref(), value, squares, json.as_deref())
        }
        Cmd::Oracle { file, bound, json } => commands::oracle(&file, bound, json.as_deref()),
        Cmd::Verify { result } => commands::verify(&result),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
