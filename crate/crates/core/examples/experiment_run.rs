//! Drives two audits through the experiment runner, as the command-line tool
//! does, and compares a rerun of the eigenvalue table against the first.

use neumann_lab::experiment::{
    compare_golden, run, ExperimentConfig, RunOptions, Subcommand, Table, Tolerances,
};

const CONFIG: &str = r#"
seed = 5

[domain]
kind = "interval"
extents_length = [0.0, 1.0]
resolution_cells = 64
margin_length = 0.2

[operator]
modes_count = 0
D_time = 0.1
f_min = 0.5
kappa_count = 3
s_smoothness = 3.0

[output]
dir = "out/example"
"#;

pub fn run_example() -> neumann_lab::Result<()> {
    let cfg = ExperimentConfig::parse(CONFIG)?;
    let dir = std::env::temp_dir().join(format!("neumann-lab-example-{}", std::process::id()));
    for (sub, out) in [
        (Subcommand::Eigen, "a"),
        (Subcommand::Rates, "a"),
        (Subcommand::Eigen, "b"),
    ] {
        let opts = RunOptions {
            out: Some(dir.join(out)),
            ..RunOptions::default()
        };
        let outcome = run(sub, &cfg, CONFIG, &opts)?;
        println!(
            "{sub} -> {}: failed invariants {:?}",
            dir.join(out).display(),
            outcome.failed
        );
    }
    let rates = Table::read(&dir.join("a/rates.csv"))?;
    println!("rates table columns: {}", rates.columns.join(", "));
    let first = Table::read(&dir.join("a/eigen.csv"))?;
    let second = Table::read(&dir.join("b/eigen.csv"))?;
    let report = compare_golden(&second, &first, &Tolerances::uniform(0.0))?;
    println!(
        "rerun: {} cells compared, {} breaches",
        report.compared,
        report.breaches.len()
    );
    println!(
        "{}",
        std::fs::read_to_string(dir.join("a/eigen.manifest.toml"))?
    );
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
