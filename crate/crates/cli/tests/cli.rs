use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lrk(dir: &Path, conf: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.conf");
    fs::write(&cfg, conf).unwrap();
    Command::new(env!("CARGO_BIN_EXE_lrk"))
        .arg("--config")
        .arg(&cfg)
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn read(dir: &Path, rel: &str) -> String {
    fs::read_to_string(dir.join(rel)).unwrap()
}

#[test]
fn voronoi_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let conf = "design = random\nrandom_n = 100\nseed = 7\n";
    for out in ["a", "b"] {
        let o = lrk(tmp.path(), conf, &["voronoi", "--output", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["voronoi_cells.csv", "voronoi_summary.csv"] {
        assert_eq!(
            read(tmp.path(), &format!("a/{f}")),
            read(tmp.path(), &format!("b/{f}"))
        );
    }
    let cells = read(tmp.path(), "a/voronoi_cells.csv");
    assert_eq!(cells.lines().count(), 101);
    let total: f64 = cells
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9, "areas sum to {total}");
}

#[test]
fn single_point_cell_is_whole_domain() {
    let tmp = TempDir::new().unwrap();
    let o = lrk(
        tmp.path(),
        "design = random\nrandom_n = 1\n",
        &["voronoi", "--output", "out"],
    );
    assert!(o.status.success());
    let cells = read(tmp.path(), "out/voronoi_cells.csv");
    let rows: Vec<&str> = cells.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let area: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(area, 1.0);
}

#[test]
fn eigen_decay_writes_consistent_spectra() {
    let tmp = TempDir::new().unwrap();
    let conf = "grid_m = 10\n";
    for out in ["a", "b"] {
        assert!(lrk(tmp.path(), conf, &["eigen-decay", "--output", out])
            .status
            .success());
    }
    for k in ["K1", "K2", "K3", "K4"] {
        let a = read(tmp.path(), &format!("a/spectrum_{k}.csv"));
        assert_eq!(a, read(tmp.path(), &format!("b/spectrum_{k}.csv")));
        let mut lines = a.lines();
        assert_eq!(lines.next(), Some("k,lambda,cumsum,tailsum"));
        let rows: Vec<Vec<f64>> = lines
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 100);
        let trace = rows[0][2] + rows[0][3];
        for r in &rows {
            assert!((r[2] + r[3] - trace).abs() <= 1e-9 * trace);
        }
        for w in rows.windows(2) {
            assert!(w[0][1] >= w[1][1]);
        }
    }
}

#[test]
fn table2_layout() {
    let tmp = TempDir::new().unwrap();
    let conf = "grid_m = 10\nk_list = 5,20\ntau_list = 0.01,1\ntable2_kernel = K3\n";
    let o = lrk(tmp.path(), conf, &["table2", "--output", "out"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read(tmp.path(), "out/table2.csv");
    let lines: Vec<&str> = t.lines().collect();
    assert_eq!(lines[0], "k,tau,cond_paper,cond_strict,mse_spectral");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("5,0.01,"));
    let s = read(tmp.path(), "out/table2_summary.csv");
    assert_eq!(s.lines().count(), 3);
}

#[test]
fn table2_rejects_rank_above_n() {
    let tmp = TempDir::new().unwrap();
    let o = lrk(tmp.path(), "grid_m = 3\nk_list = 10\n", &["table2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_single_check() {
    let tmp = TempDir::new().unwrap();
    let o = lrk(
        tmp.path(),
        "",
        &["verify", "--only", "lemma2", "--output", "out"],
    );
    assert_eq!(o.status.code(), Some(0));
    let report = read(tmp.path(), "out/verify_report.csv");
    let checks: std::collections::BTreeSet<&str> = report
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(checks.into_iter().collect::<Vec<_>>(), ["lemma2"]);
}

#[test]
fn corrupted_golden_fails() {
    let tmp = TempDir::new().unwrap();
    let conf = "grid_m = 10\ngolden.cumsum.K1.5 = 999,0.01\n";
    let o = lrk(
        tmp.path(),
        conf,
        &["verify", "--only", "golden", "--output", "out"],
    );
    assert_eq!(o.status.code(), Some(1));
    let report = read(tmp.path(), "out/verify_report.csv");
    assert!(report.lines().any(|l| l.ends_with(",false")));
}

#[test]
fn matching_golden_passes() {
    let tmp = TempDir::new().unwrap();
    let probe = lrk(
        tmp.path(),
        "grid_m = 10\n",
        &["eigen-decay", "--output", "p"],
    );
    assert!(probe.status.success());
    let spec = read(tmp.path(), "p/spectrum_K1.csv");
    let cumsum5 = spec.lines().nth(5).unwrap().split(',').nth(2).unwrap();
    let conf = format!("grid_m = 10\ngolden.cumsum.K1.5 = {cumsum5},1e-9\n");
    let o = lrk(tmp.path(), &conf, &["verify", "--only", "golden"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(
        lrk(tmp.path(), "", &["verify", "--only", "nope"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lrk(tmp.path(), "bogus = 1\n", &["verify"]).status.code(),
        Some(2)
    );
    assert_eq!(
        lrk(tmp.path(), "grid_m = 10\ngrid_m = 11\n", &["voronoi"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lrk(
            tmp.path(),
            "grid_m = 10\n",
            &["--max-matrix-bytes", "100", "eigen-decay"]
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let conf = "design = random\nrandom_n = 30\nseed = 1\n";
    lrk(tmp.path(), conf, &["voronoi", "--output", "a"]);
    lrk(
        tmp.path(),
        conf,
        &["--seed", "2", "voronoi", "--output", "b"],
    );
    assert_ne!(
        read(tmp.path(), "a/voronoi_cells.csv"),
        read(tmp.path(), "b/voronoi_cells.csv")
    );
}
