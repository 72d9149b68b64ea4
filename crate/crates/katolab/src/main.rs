use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use katolab::commands::{self, EXIT_ERROR};
use katolab::Overrides;

#[derive(Parser)]
#[command(name = "katolab", version, about = "Classify measures into L^p-Kato and L^p-Dynkin classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verdicts per p, with report.txt and classify.csv
    Classify(RunArgs),
    /// Fitted decay order delta against p, as sweep_p.csv
    SweepP(RunArgs),
    /// Invariant table of the configured heat kernel, as kernel_check.csv
    KernelCheck(RunArgs),
    /// Monte Carlo additive functionals against quadrature, as mc_check.csv
    McCheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: output.dir from the config)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated exponents, e.g. 1,2,3.5
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long)]
    grid_depth: Option<usize>,
    /// Number of quasi-random centers added to the adapted ones
    #[arg(long)]
    centers: Option<usize>,
    /// Worker threads
    #[arg(long, env = "KATOLAB_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (Command::Classify(a) | Command::SweepP(a) | Command::KernelCheck(a) | Command::McCheck(a)) = &cli.command;
    if let Some(n) = a.threads.filter(|n| *n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let o = Overrides { seed: a.seed, p: a.p.clone(), grid_depth: a.grid_depth, centers: a.centers };
    let result = commands::prepare(&a.config, a.out.as_deref(), &o).and_then(|(cfg, dir)| match &cli.command {
        Command::Classify(_) => commands::cmd_classify(&cfg, &dir, &o),
        Command::SweepP(_) => commands::cmd_sweep_p(&cfg, &dir, &o),
        Command::KernelCheck(_) => commands::cmd_kernel_check(&cfg, &dir, &o),
        Command::McCheck(_) => commands::cmd_mc_check(&cfg, &dir, &o),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
