//! `tractlab`: spectra, information complexity, tractability verdicts, and
//! sampling-recovery experiments for periodic tensor-product kernel spaces.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage or input error, 3 partial
//! result (search cap hit, failed trials, or replay mismatch).

mod commands;
mod model_file;
mod output;

use std::fmt;
use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};

use commands::{ComplexityParams, RecoverParams, RunCtx, TractParams};

/// Bad flags, bad files, bad parameter combinations. Mapped to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "tractlab", version, about = "Spectra, complexity, tractability, and sampling recovery for periodic tensor-product kernel spaces")]
struct Cli {
    /// Model file (TOML, or JSON with a .json extension)
    #[arg(long, global = true, value_name = "FILE")]
    model: Option<PathBuf>,

    /// Write CSV here instead of stdout (also enables the run manifest)
    #[arg(long, global = true, visible_alias = "csv", value_name = "FILE")]
    out: Option<PathBuf>,

    /// Master seed for all randomized work
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (overrides TRACTLAB_THREADS)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Mirror the output as JSON next to --out
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the leading eigenvalues with their frequency vectors
    Spectrum {
        /// How many ranked eigenvalues to print
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Information complexity n(eps) over an epsilon grid
    Complexity {
        /// Epsilon grid: a single value or start:end:scale (scale log or lin)
        #[arg(long, default_value = "1e-1:1e-6:log")]
        eps_grid: String,
        /// Number of grid points for a range
        #[arg(long, default_value_t = 50)]
        eps_count: usize,
        /// Error criterion: abs or nor
        #[arg(long, default_value = "abs")]
        criterion: String,
        /// Sample-cost factor in the standard-information bound
        #[arg(long, default_value_t = 43200)]
        c1: u64,
        /// Epsilon-shrink factor in the standard-information bound
        #[arg(long, default_value_t = 30.0)]
        c2: f64,
        /// Give up once n exceeds this cap (rows marked `cap`, exit 3)
        #[arg(long, default_value_t = 10_000_000)]
        cap: u64,
    },
    /// Tractability verdicts for the model's parameter sequences
    Tract {
        #[command(subcommand)]
        action: TractAction,
    },
    /// Weighted least-squares recovery experiment vs the optimal benchmark
    Recover {
        /// TOML file with the same knobs; explicit flags win
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Comma-separated list of section sizes m
        #[arg(long)]
        m: Option<String>,
        /// Independent trials per m
        #[arg(long)]
        seeds: Option<usize>,
        /// Oversampling factor in n = ceil(beta * m * ln(m+1))
        #[arg(long)]
        beta: Option<f64>,
        /// Subsample the drawn nodes before fitting: on or off
        #[arg(long)]
        subsample: Option<String>,
        /// Target subset size factor: keep about factor * m nodes
        #[arg(long)]
        factor: Option<f64>,
        /// Lower spectral bound requested from the subsampler
        #[arg(long)]
        lower: Option<f64>,
        /// Error-measurement grid resolution per dimension
        #[arg(long)]
        grid: Option<usize>,
        /// Concentration check policy: first, all, or off
        #[arg(long)]
        concentration: Option<String>,
        /// Print real wall times (default prints 0 to keep output reproducible)
        #[arg(long)]
        timings: bool,
    },
    /// Re-run a recorded invocation and verify the output hashes
    Replay {
        /// Manifest written next to a previous --out
        manifest: PathBuf,
    },
}

#[derive(Subcommand)]
enum TractAction {
    /// One verdict for a single notion
    Classify {
        /// spt, pt, qpt, uwt, wt, or st_wt
        #[arg(long)]
        notion: String,
        /// alg or exp (default alg)
        #[arg(long)]
        mode: Option<String>,
        /// abs or nor (default abs)
        #[arg(long)]
        criterion: Option<String>,
        /// Exponent s for st_wt
        #[arg(long)]
        s: Option<f64>,
        /// Exponent t for st_wt
        #[arg(long)]
        t: Option<f64>,
    },
    /// Verdicts for every notion, both modes unless --mode is given
    Sweep {
        /// alg or exp (default: both)
        #[arg(long)]
        mode: Option<String>,
        /// abs or nor (default abs)
        #[arg(long)]
        criterion: Option<String>,
        /// Include an st_wt row with this s (needs --t)
        #[arg(long)]
        s: Option<f64>,
        /// Include an st_wt row with this t (needs --s)
        #[arg(long)]
        t: Option<f64>,
    },
}

fn init_threads(requested: Option<usize>) -> Result<()> {
    let from_env = std::env::var("TRACTLAB_THREADS").ok().and_then(|raw| match raw.parse::<usize>() {
        Ok(n) if n >= 1 => Some(n),
        _ => {
            eprintln!("ignoring TRACTLAB_THREADS={raw:?} (needs an integer >= 1)");
            None
        }
    });
    if let Some(n) = requested {
        if n < 1 {
            return Err(anyhow!(UsageError("--threads must be at least 1".into())));
        }
    }
    if let Some(n) = requested.or(from_env) {
        // A failure here means a pool already exists (tests call in-process);
        // the existing pool is fine, so ignore it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn dispatch(cli: Cli, argv: Vec<String>) -> Result<i32> {
    let ctx = RunCtx::new(argv, cli.model, cli.out, cli.seed, cli.json);
    match cli.command {
        Command::Spectrum { count } => commands::cmd_spectrum(&ctx, count),
        Command::Complexity { eps_grid, eps_count, criterion, c1, c2, cap } => {
            let params = ComplexityParams { eps_grid, eps_count, criterion, c1, c2, cap };
            commands::cmd_complexity(&ctx, &params)
        }
        Command::Tract { action } => {
            let params = match action {
                TractAction::Classify { notion, mode, criterion, s, t } => TractParams {
                    sweep: false,
                    notion: Some(notion),
                    mode,
                    criterion,
                    s,
                    t,
                },
                TractAction::Sweep { mode, criterion, s, t } => {
                    TractParams { sweep: true, notion: None, mode, criterion, s, t }
                }
            };
            commands::cmd_tract(&ctx, &params)
        }
        Command::Recover {
            config,
            m,
            seeds,
            beta,
            subsample,
            factor,
            lower,
            grid,
            concentration,
            timings,
        } => {
            let params = RecoverParams {
                config,
                m,
                seeds,
                beta,
                subsample,
                factor,
                lower,
                grid,
                concentration,
                timings,
            };
            commands::cmd_recover(&ctx, &params)
        }
        Command::Replay { manifest } => commands::cmd_replay(&manifest, |recorded| {
            let padded = std::iter::once("tractlab".to_string()).chain(recorded.iter().cloned());
            let inner = Cli::try_parse_from(padded).map_err(|e| {
                anyhow!(UsageError(format!("recorded command does not parse: {e}")))
            })?;
            if matches!(inner.command, Command::Replay { .. }) {
                return Err(anyhow!(UsageError("refusing to replay a replay".into())));
            }
            dispatch(inner, recorded.to_vec())
        }),
    }
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    use tractlab_core::complexity::ComplexityError;
    use tractlab_core::recovery::RecoveryError;
    use tractlab_core::sequence::SequenceError;
    use tractlab_core::tractability::TractabilityError;
    use tractlab_core::ModelError;

    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<RecoveryError>() {
        return match e {
            RecoveryError::BadConfig(_) | RecoveryError::Model(_) => 2,
            _ => 3,
        };
    }
    if err.downcast_ref::<ModelError>().is_some()
        || err.downcast_ref::<SequenceError>().is_some()
        || err.downcast_ref::<TractabilityError>().is_some()
        || err.downcast_ref::<ComplexityError>().is_some()
    {
        return 2;
    }
    1
}

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let code = match init_threads(cli.threads).and_then(|()| dispatch(cli, argv)) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code_for(&err)
        }
    };
    std::process::exit(code);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses_defaults() {
        let cli = Cli::try_parse_from(["tractlab", "complexity", "--model", "m.toml"]).unwrap();
        assert_eq!(cli.seed, 0);
        match cli.command {
            Command::Complexity { eps_count, c1, c2, cap, .. } => {
                assert_eq!(eps_count, 50);
                assert_eq!(c1, 43200);
                assert_eq!(c2, 30.0);
                assert_eq!(cap, 10_000_000);
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn csv_alias_sets_out() {
        let cli =
            Cli::try_parse_from(["tractlab", "spectrum", "--count", "5", "--csv", "x.csv"]).unwrap();
        assert_eq!(cli.out.as_deref(), Some(std::path::Path::new("x.csv")));
    }

    #[test]
    fn replay_takes_a_manifest_path() {
        let cli = Cli::try_parse_from(["tractlab", "replay", "run.csv.manifest.json"]).unwrap();
        assert!(matches!(cli.command, Command::Replay { .. }));
    }
}
