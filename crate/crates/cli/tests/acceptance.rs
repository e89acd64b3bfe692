//! Acceptance: determinism of the command-line surface under parallelism.
//! One pass/fail line is printed per criterion covered here.

use std::path::{Path, PathBuf};
use std::process::Command;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_probshap")
}

fn wine_csv() -> PathBuf {
    if let Ok(p) = std::env::var("PROBSHAP_WINE_CSV") {
        return p.into();
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/winequality-white.csv")
}

fn run_to_dir(method: &str, threads: &str, dataset: &str, out: &Path) {
    let wine = wine_csv();
    let mut args = vec![
        "--threads",
        threads,
        "run",
        "--dataset",
        dataset,
        "--method",
        method,
        "--games",
        "6",
        "--iters",
        "12",
        "--replications",
        "2",
        "--seed",
        "17",
        "--out",
        out.to_str().unwrap(),
    ];
    let wine_str = wine.to_str().unwrap().to_owned();
    if dataset == "wine" {
        args.push("--wine-csv");
        args.push(&wine_str);
    }
    if method == "baseline" {
        args.extend_from_slice(&["--n-sample", "40"]);
    } else {
        args.extend_from_slice(&["--n-pool", "120", "--n-boot", "25"]);
    }
    let result = Command::new(binary()).args(&args).output().unwrap();
    assert!(
        result.status.success(),
        "{method} on {dataset} with --threads {threads} failed: {}",
        String::from_utf8_lossy(&result.stderr)
    );
}

/// Criterion 8: `run` with `--threads 1` and `--threads 8` produces
/// byte-identical output files for all three methods.
#[test]
fn criterion_8_determinism_under_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    for dataset in ["synthetic", "wine"] {
        for method in ["baseline", "pooled", "stratified"] {
            let single = dir.path().join(format!("{dataset}_{method}_t1"));
            let eight = dir.path().join(format!("{dataset}_{method}_t8"));
            run_to_dir(method, "1", dataset, &single);
            run_to_dir(method, "8", dataset, &eight);
            for file in ["replication_000.csv", "replication_001.csv", "summary.json"] {
                let a = std::fs::read(single.join(file)).unwrap();
                let b = std::fs::read(eight.join(file)).unwrap();
                assert_eq!(
                    a, b,
                    "{dataset}/{method}: {file} differs between --threads 1 and --threads 8"
                );
            }
        }
    }
    println!(
        "[PASS] criterion 8: byte-identical outputs for threads 1 vs 8 \
         across baseline/pooled/stratified on synthetic and wine"
    );
}
