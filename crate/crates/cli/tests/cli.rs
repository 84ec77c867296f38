use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mvfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvfc"))
        .args(args)
        .output()
        .expect("spawn mvfc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
        .trim()
        .parse()
        .unwrap()
}

fn synth(dir: &Path) {
    let o = mvfc(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--n",
        "90",
        "--dims",
        "6,5",
        "--seed",
        "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn synth_writes_views_and_labels() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("data");
    synth(&dir);
    for f in ["view_1.csv", "view_2.csv", "labels.csv"] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let labels = fs::read_to_string(dir.join("labels.csv")).unwrap();
    assert_eq!(labels.lines().filter(|l| !l.trim().is_empty()).count(), 90);
}

#[test]
fn fit_from_config_with_relative_paths() {
    let tmp = tempfile::tempdir().unwrap();
    synth(&tmp.path().join("data"));
    let cfg = tmp.path().join("exp.toml");
    fs::write(
        &cfg,
        r#"
algorithm = "cofkm"
clusters = 3

[dataset]
kind = "files"
views = ["data/view_1.csv", "data/view_2.csv"]
labels = "data/labels.csv"
"#,
    )
    .unwrap();
    let trace = tmp.path().join("trace.csv");
    let o = mvfc(&[
        "fit",
        "--config",
        cfg.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("dataset     data"), "{out}");
    let nmi = field(&out, "nmi");
    assert!((0.0..=1.0).contains(&nmi));
    let rows = fs::read_to_string(trace).unwrap();
    assert!(rows.starts_with("iteration,objective,delta"));
    assert_eq!(rows.lines().count() as f64 - 1.0, field(&out, "iterations"));
}

#[test]
fn flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.toml");
    fs::write(
        &cfg,
        r#"
algorithm = "fcm"

[dataset]
kind = "synthetic"
n = 60
c_true = 2
r_true = 2
view_dims = [4, 4]
noise_sigma = 0.0
seed = 1
"#,
    )
    .unwrap();
    let o = mvfc(&[
        "fit",
        "--config",
        cfg.to_str().unwrap(),
        "--algorithm",
        "hss",
        "--lambda",
        "2",
        "--t-max",
        "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("algorithm   hss"), "{out}");
    assert!(out.contains("lambda=2"), "{out}");
    assert_eq!(field(&out, "iterations"), 5.0);
}

#[test]
fn grid_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let o = mvfc(&[
        "grid",
        "--synth-n",
        "60",
        "--synth-dims",
        "5,4",
        "--algorithm",
        "fcm",
        "--fuzzifier",
        "1.5,2",
        "--runs",
        "2",
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 2 * 2);
    let summary = fs::read_to_string(out_dir.join("summary.json")).unwrap();
    assert!(summary.contains("\"best_cell_by_nmi\""));
    assert_eq!(fs::read_dir(out_dir.join("traces")).unwrap().count(), 4);
}

#[test]
fn stats_on_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let fixture = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/fixtures/ri_scores.csv"
    );
    let o = mvfc(&["stats", fixture, "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("0.006361"), "{out}");
    assert!(out.contains("HSS-MVFC      1.3333"), "{out}");
    assert!(tmp.path().join("friedman.csv").is_file());
    assert!(tmp.path().join("holm.csv").is_file());
}

#[test]
fn invalid_input_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "algorithm = \"hss\"\n[dataset]\nkind = \"synthetic\"\nn = 0\nc_true = 2\nr_true = 2\nview_dims = [3]\nnoise_sigma = 0.0\nseed = 0\n").unwrap();
    let out_dir = tmp.path().join("out");
    for args in [
        vec!["fit", "--config", cfg.to_str().unwrap()],
        vec![
            "grid",
            "--config",
            cfg.to_str().unwrap(),
            "--output-dir",
            out_dir.to_str().unwrap(),
        ],
        vec!["fit", "--synth-n", "60", "--algorithm", "kmeans"],
        vec!["fit", "--algorithm", "hss"],
        vec!["stats", "/nonexistent/scores.csv"],
    ] {
        let o = mvfc(&args);
        assert!(!o.status.success(), "{args:?} succeeded");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
    assert!(!out_dir.exists());
}
