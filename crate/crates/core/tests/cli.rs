use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SUBCOMMANDS: [&str; 12] = [
    "eigen",
    "weyl",
    "duhamel",
    "lemma31",
    "transport",
    "floor",
    "stability",
    "minimax",
    "kl",
    "simulate",
    "estimate",
    "rates",
];

const SMALL: &str = r#"
seed = 3

[domain]
kind = "interval"
extents_length = [0.0, 1.0]
resolution_cells = 160
margin_length = 0.1

[operator]
modes_count = 0
D_time = 0.5
f_min = 0.5
kappa_count = 2
s_smoothness = 3.0

[family]
members_count = 4
probe_members_count = 4
amplitude = 0.3
cases_count = 3
pairs_count = 10

[frame]
j_scales = [1]
eta = 1.0
anisotropy_c = 1.0
multiplier = 4
center_length = [0.5, 0.0]
radius_length = 0.3
pairs_count = 2
N_samples = 1000
kl_convention = "display"
pipeline_N_list = [256]

[simulation]
diffusivity_constant = 1.0
N_samples = 400
N_list = [100, 200]
dt_time = 0.01
seeds_count = 2
truncation_count = 2
histogram_bins = 4

[output]
dir = "unused"
"#;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neumann-lab"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_into(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        sub,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    lab(&args)
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn every_subcommand_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "small.toml", SMALL);
    for sub in SUBCOMMANDS {
        for (out, jobs) in [("a", "1"), ("b", "2")] {
            let o = run_into(
                sub,
                &config,
                &tmp.path().join(sub).join(out),
                &["--jobs", jobs],
            );
            assert_eq!(
                o.status.code(),
                Some(0),
                "{sub}: {}",
                String::from_utf8_lossy(&o.stderr)
            );
        }
        let a = listing(&tmp.path().join(sub).join("a"));
        let b = listing(&tmp.path().join(sub).join("b"));
        assert!(a.iter().any(|(n, _)| n == &format!("{sub}.manifest.toml")));
        assert!(
            a.iter().any(|(n, _)| n.ends_with(".csv")),
            "{sub} wrote no table"
        );
        assert!(
            a.iter().all(|(n, _)| !n.starts_with('.')),
            "{sub} left a temporary file"
        );
        assert_eq!(a, b, "{sub} differs between runs");
    }
}

#[test]
fn manifest_records_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "small.toml", SMALL);
    let out = tmp.path().join("o");
    assert!(run_into("eigen", &config, &out, &["--seed", "42"])
        .status
        .success());
    let manifest: toml::Table = std::fs::read_to_string(out.join("eigen.manifest.toml"))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(manifest["subcommand"].as_str(), Some("eigen"));
    assert_eq!(manifest["seed"].as_integer(), Some(42));
    assert_eq!(manifest["status"].as_str(), Some("pass"));
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    let files = manifest["files"].as_array().unwrap();
    assert!(files.iter().any(|f| f.as_str() == Some("eigen.csv")));
}

#[test]
fn seed_override_changes_the_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "small.toml", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run_into("simulate", &config, &a, &[]).status.success());
    assert!(run_into("simulate", &config, &b, &["--seed", "4"])
        .status
        .success());
    let ta = std::fs::read(a.join("trajectory.csv")).unwrap();
    let tb = std::fs::read(b.join("trajectory.csv")).unwrap();
    assert_ne!(ta, tb);
}

#[test]
fn compare_golden_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let golden = write_config(tmp.path(), "golden.csv", "k,value\n1,9.8696\n2,39.478\n");
    let same = write_config(tmp.path(), "same.csv", "k,value\n1,9.8696\n2,39.478\n");
    let drift = write_config(tmp.path(), "drift.csv", "k,value\n1,9.8696\n2,39.9\n");
    let schema = write_config(tmp.path(), "schema.csv", "k,lambda\n1,9.8696\n2,39.478\n");
    let cmp = |a: &Path, extra: &[&str]| {
        let mut args = vec![
            "compare-golden",
            "--artifact",
            a.to_str().unwrap(),
            "--golden",
            golden.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        lab(&args)
    };
    assert_eq!(cmp(&same, &[]).status.code(), Some(0));
    let o = cmp(&drift, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("value"));
    assert_eq!(
        cmp(&drift, &["--column-tol", "value=0.02"]).status.code(),
        Some(0)
    );
    assert_eq!(cmp(&drift, &["--rel-tol", "0.02"]).status.code(), Some(0));
    assert_eq!(cmp(&schema, &[]).status.code(), Some(2));
}

#[test]
fn invalid_configs_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_config(
        tmp.path(),
        "bad.toml",
        &SMALL.replace("margin_length = 0.1", "margin_length = 0.0"),
    );
    let o = run_into("eigen", &bad, &tmp.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain.margin_length"));
    assert!(!tmp.path().join("o").exists());

    let start = SMALL.find("[frame]").unwrap();
    let end = SMALL.find("[simulation]").unwrap();
    let no_frame = write_config(
        tmp.path(),
        "no_frame.toml",
        &format!("{}{}", &SMALL[..start], &SMALL[end..]),
    );
    let o = run_into("minimax", &no_frame, &tmp.path().join("m"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[frame]"));

    let o = lab(&[
        "eigen",
        "--config",
        tmp.path().join("missing.toml").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
