use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wulffkit_cli::{run, Command, Overrides};

#[derive(Parser)]
#[command(name = "wulffkit", version, about = "Anisotropic curvature, Wulff shapes and integral identities")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample the Wulff shape; writes wulff.obj or wulff.csv and wulff_summary.json.
    Wulff(Args),
    /// Run the configured checks; writes report.json.
    Verify(Args),
    /// Per-node curvature table; writes curvature.csv and curvature_summary.json.
    Curvature(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Force finite-difference derivatives for the norm and the embedding.
    #[arg(long)]
    fd: bool,
    /// Base grid, `N` or `N,M`.
    #[arg(long, value_delimiter = ',')]
    resolution: Option<Vec<usize>>,
    /// Number of refinement levels.
    #[arg(long)]
    levels: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Wulff(a) => (Command::Wulff, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Curvature(a) => (Command::Curvature, a),
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot set thread count: {e}");
            return ExitCode::from(2);
        }
    }
    let overrides = Overrides { out: args.out, fd: args.fd, resolution: args.resolution, levels: args.levels };
    match run(command, &args.config, &overrides) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            println!("{}", e.to_json());
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
