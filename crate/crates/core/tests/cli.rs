use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_rotated-mondrian");

fn run(args: &[&str], out: &Path, threads: usize) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--threads")
        .arg(threads.to_string())
        .arg("--no-svg")
        .output()
        .expect("binary runs")
}

/// Contents of every csv and json file, with the CPU-time column of the
/// timing table blanked.
fn outputs(dir: &Path) -> BTreeMap<String, String> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let mut text = fs::read_to_string(&path).unwrap();
        if name == "regress_time.csv" {
            text = text
                .lines()
                .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
                .collect::<Vec<_>>()
                .join("\n");
        }
        files.insert(name, text);
    }
    files
}

fn assert_reproducible(args: &[&str]) {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (dir, threads) in dirs.iter().zip([2, 2, 1]) {
        let o = run(args, dir, threads);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let first = outputs(&dirs[0]);
    assert!(first.keys().any(|k| k.ends_with(".meta.json")));
    assert_eq!(first, outputs(&dirs[1]), "{args:?}: repeated run differs");
    assert_eq!(first, outputs(&dirs[2]), "{args:?}: thread count changes output");
}

#[test]
fn converge_is_reproducible() {
    assert_reproducible(&[
        "converge",
        "--seed",
        "3",
        "--points",
        "30",
        "--features",
        "10",
        "--repeats",
        "2",
    ]);
}

#[test]
fn recover_is_reproducible() {
    assert_reproducible(&[
        "recover",
        "--seed",
        "3",
        "--n-per-split",
        "40",
        "--features",
        "10",
        "--samples",
        "2000",
    ]);
}

#[test]
fn regress_is_reproducible() {
    assert_reproducible(&[
        "regress",
        "--seed",
        "3",
        "--rows",
        "120",
        "--repeats",
        "2",
        "--feature-counts",
        "1,4",
        "--features",
        "20",
        "--search-budget",
        "4",
    ]);
}

#[test]
fn mondrian_line_is_reproducible() {
    assert_reproducible(&[
        "mondrian-line",
        "--seed",
        "3",
        "--n-per-split",
        "60",
        "--features",
        "20",
        "--evaluations",
        "10",
    ]);
}

#[test]
fn typical_cell_is_reproducible() {
    assert_reproducible(&["typical-cell", "--seed", "3", "--samples", "2000", "--write-samples"]);
}

#[test]
fn typical_cell_passes_with_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["typical-cell", "--seed", "1", "--samples", "20000", "--rotations", "2"],
        tmp.path(),
        1,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("typical_cell.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn missing_seed_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["converge", "--points", "5"], tmp.path(), 1);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
}

#[test]
fn unknown_method_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["converge", "--seed", "1", "--methods", "fourier,voronoi"],
        tmp.path(),
        1,
    );
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("voronoi"));
}

#[test]
fn invalid_sizes_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["typical-cell", "--seed", "1", "--samples", "10"], tmp.path(), 1);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["recover", "--seed", "1", "--lifetime", "-1"], tmp.path(), 1);
    assert_eq!(o.status.code(), Some(2));
}
