use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use neumann_lab::experiment::{
    compare_golden, run, ExperimentConfig, RunOptions, Subcommand, Table, Tolerances,
};

#[derive(Parser)]
#[command(
    name = "neumann-lab",
    version,
    about = "Audits for divergence-form Neumann diffusions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    golden: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    artifact: PathBuf,
    #[arg(long)]
    golden: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
    /// Per-column override, `column=tolerance`; may repeat.
    #[arg(long = "column-tol", value_parser = parse_column_tol)]
    column_tol: Vec<(String, f64)>,
}

fn parse_column_tol(s: &str) -> Result<(String, f64), String> {
    let (name, tol) = s.split_once('=').ok_or("expected column=tolerance")?;
    Ok((name.to_string(), tol.parse().map_err(|e| format!("{e}"))?))
}

#[derive(ClapSubcommand)]
enum Command {
    Eigen(RunArgs),
    Weyl(RunArgs),
    Duhamel(RunArgs),
    Lemma31(RunArgs),
    Transport(RunArgs),
    Floor(RunArgs),
    Stability(RunArgs),
    Minimax(RunArgs),
    Kl(RunArgs),
    Simulate(RunArgs),
    Estimate(RunArgs),
    Rates(RunArgs),
    CompareGolden(CompareArgs),
}

fn run_audit(sub: Subcommand, args: RunArgs) -> neumann_lab::Result<bool> {
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| neumann_lab::LabError::Config(format!("--jobs: {e}")))?;
    }
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        neumann_lab::LabError::Config(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let cfg = ExperimentConfig::parse(&text)?;
    let opts = RunOptions {
        seed: args.seed,
        out: args.out,
        golden: args.golden,
    };
    let outcome = run(sub, &cfg, &text, &opts)?;
    for name in &outcome.failed {
        eprintln!("FAILED {name}");
    }
    Ok(outcome.failed.is_empty())
}

fn run_compare(args: CompareArgs) -> neumann_lab::Result<bool> {
    let artifact = Table::read(&args.artifact)?;
    let golden = Table::read(&args.golden)?;
    let tol = Tolerances {
        default: args.rel_tol,
        per_column: args.column_tol.into_iter().collect(),
    };
    let report = compare_golden(&artifact, &golden, &tol)?;
    for b in &report.breaches {
        eprintln!("BREACH {b}");
    }
    println!(
        "compared {} cells, {} breaches",
        report.compared,
        report.breaches.len()
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::CompareGolden(a) => run_compare(a),
        Command::Eigen(a) => run_audit(Subcommand::Eigen, a),
        Command::Weyl(a) => run_audit(Subcommand::Weyl, a),
        Command::Duhamel(a) => run_audit(Subcommand::Duhamel, a),
        Command::Lemma31(a) => run_audit(Subcommand::Lemma31, a),
        Command::Transport(a) => run_audit(Subcommand::Transport, a),
        Command::Floor(a) => run_audit(Subcommand::Floor, a),
        Command::Stability(a) => run_audit(Subcommand::Stability, a),
        Command::Minimax(a) => run_audit(Subcommand::Minimax, a),
        Command::Kl(a) => run_audit(Subcommand::Kl, a),
        Command::Simulate(a) => run_audit(Subcommand::Simulate, a),
        Command::Estimate(a) => run_audit(Subcommand::Estimate, a),
        Command::Rates(a) => run_audit(Subcommand::Rates, a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
