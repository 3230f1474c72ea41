use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gtsa_cli::commands;
use gtsa_cli::config::load_config;
use gtsa_cli::report::{metrics_json, to_text};
use gtsa_cli::CliError;

/// Geodesic tangent space aggregation PCA.
#[derive(Parser)]
#[command(name = "gtsa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed, cluster and score one method; writes embedding.csv,
    /// metrics.json, scatter.svg and report.json.
    Run {
        config: PathBuf,
        /// `--key value` pairs overriding config entries, e.g. `--gtsa.k 5`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Table of ARI/FM/VM for every method in `compare.methods`.
    Compare {
        config: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Scatter plot of a 2-D embedding CSV.
    Plot {
        embedding: PathBuf,
        /// Partition CSV (`index,label`) used for colors.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Scores a partition CSV against a label CSV.
    Score { partition: PathBuf, labels: PathBuf },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GTSA_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("GTSA_THREADS = '{v}' is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = load_config(&config, &overrides)?;
            let out = commands::run(&cfg)?;
            print!("{}", to_text(&metrics_json(out.metrics.as_ref())));
            eprintln!("wrote {}", out.dir.display());
            Ok(true)
        }
        Command::Compare { config, overrides } => {
            let cfg = load_config(&config, &overrides)?;
            let table = commands::compare(&cfg)?;
            print!("{}", table.to_text());
            Ok(!table.failed())
        }
        Command::Plot {
            embedding,
            labels,
            output,
        } => {
            commands::plot(&embedding, labels.as_deref(), &output)?;
            Ok(true)
        }
        Command::Score { partition, labels } => {
            let m = commands::score_files(&partition, &labels)?;
            print!("{}", to_text(&metrics_json(Some(&m))));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
