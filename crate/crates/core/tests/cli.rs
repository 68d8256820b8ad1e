use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use critlab::harness::{exit_code, RunConfig, RunOutcome};
use critlab::Error;

fn critlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critlab"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

#[test]
fn collapse_check_bundled_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = critlab(&[
        "collapse-check",
        "--config",
        "prop1_quantiles",
        "--out",
        out_dir.to_str().unwrap(),
        "--parallel",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("all checks passed"));
    let csv = fs::read_to_string(out_dir.join("suite.csv")).unwrap();
    assert!(csv.starts_with("# command = collapse-check\n"));
    assert_eq!(data_rows(&csv).len(), 10);
    assert!(data_rows(&csv).iter().all(|r| r.ends_with(",0")));
}

#[test]
fn regime_config_writes_three_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = critlab(&[
        "collapse-check",
        "--config",
        "b2_cvar_regimes",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("regimes.csv")).unwrap();
    let verdicts: Vec<&str> = data_rows(&csv)
        .iter()
        .map(|r| r.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(
        verdicts,
        ["trivial_all_optimal", "coincide", "intermediate"]
    );
}

#[test]
fn unknown_key_is_a_config_error_naming_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "# typo below\nbetta = 0.5\n").unwrap();
    let out = critlab(&[
        "collapse-check",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("betta") && err.contains("line 2"), "{err}");
}

#[test]
fn missing_config_and_bad_flags_are_usage_errors() {
    let out = critlab(&["train", "--config", "/nonexistent/run.conf"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("/nonexistent/run.conf"));
    assert_eq!(code(&critlab(&["train", "--parallel", "0"])), 2);
    assert_eq!(code(&critlab(&["frobnicate"])), 2);
}

#[test]
fn surrogate_demo_rejects_p_one() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("p.conf");
    fs::write(&conf, "p = 1\n").unwrap();
    let out = critlab(&[
        "surrogate-demo",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("`p`"), "{}", stderr(&out));
}

#[test]
fn surrogate_demo_reports_ordering_facts_for_other_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("s.conf");
    fs::write(&conf, "a = 1.5\np = 0.6\n").unwrap();
    let out = critlab(&[
        "surrogate-demo",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("max loss s2 < s1: true") && stdout.contains("min loss s2 < s1: true"));
    let csv = fs::read_to_string(dir.path().join("divergence.csv")).unwrap();
    assert_eq!(data_rows(&csv).len(), 3);
}

#[test]
fn train_writes_trajectory_plot_and_reparsable_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = critlab(&[
        "train",
        "--config",
        "blobs_flooding",
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "4",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("train.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 101 * 3);
    assert!(rows[0].starts_with("0,train,") && rows[302].starts_with("100,test,"));
    let cfg = RunConfig::from_header(&csv).unwrap();
    assert_eq!(cfg.seed, 4);
    let mut expected = RunConfig::parse(
        critlab::harness::config::bundled("blobs_flooding").unwrap(),
        None,
    )
    .unwrap();
    expected.seed = 4;
    assert_eq!(cfg, expected);
    let svg = fs::read_to_string(dir.path().join("train.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 9);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("t.conf");
    fs::write(
        &conf,
        "train.method = cvar:0.5\ntrain.epochs = 5\ndata.n_train = 300\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = critlab(&[
            "train",
            "--config",
            conf.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            "11",
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        fs::read(out_dir.join("train.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn missing_dataset_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("f.conf");
    fs::write(
        &conf,
        "data.kind = file\ndata.train = /missing/train.txt\ndata.val = /missing/val.txt\ndata.test = /missing/test.txt\n",
    )
    .unwrap();
    let out = critlab(&[
        "train",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("/missing/train.txt"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn saved_splits_train_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    let conf = dir.path().join("g.conf");
    fs::write(&conf, "data.kind = blobs3\ndata.n_train = 150\ndata.n_val = 60\ndata.n_test = 60\ndata.save = true\ntrain.epochs = 3\n").unwrap();
    let out = critlab(&[
        "train",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        gen.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let from_files = dir.path().join("f.conf");
    let p = |n: &str| gen.join(n).display().to_string();
    fs::write(
        &from_files,
        format!(
            "data.kind = file\ndata.train = {}\ndata.val = {}\ndata.test = {}\ntrain.epochs = 3\n",
            p("train.txt"),
            p("val.txt"),
            p("test.txt")
        ),
    )
    .unwrap();
    let again = dir.path().join("again");
    let out = critlab(&[
        "train",
        "--config",
        from_files.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = |d: &Path| {
        let csv = fs::read_to_string(d.join("train.csv")).unwrap();
        data_rows(&csv)
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(rows(&gen), rows(&again));
}

#[test]
fn divergence_exits_3_and_keeps_partial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("d.conf");
    fs::write(
        &conf,
        "model.arch = linear\ntrain.loss = quadratic\ntrain.step_size = 50\ntrain.epochs = 50\n",
    )
    .unwrap();
    let out = critlab(&[
        "train",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("train.csv")).unwrap();
    assert!(csv.starts_with("# command = train\n"));
    let rows = data_rows(&csv);
    assert!(!rows.is_empty() && rows.len() < 51 * 3);
}

#[test]
fn sweep_with_one_trial_has_zero_std() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("s.conf");
    fs::write(
        &conf,
        "data.n_train = 200\ndata.n_val = 100\ndata.n_test = 100\nmodel.arch = linear\ntrain.epochs = 5\ntrials = 1\n\
         sweep.grid.cvar = 0, 0.5\nsweep.grid.dro = 0, 0.5\nsweep.grid.flooding = 0.01, 0.3\n\
         sweep.grid.softad = 0.01, 0.3\nsweep.grid.tilted = 0, 1\n",
    )
    .unwrap();
    let out = critlab(&[
        "sweep",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--parallel",
        "3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 5);
    assert!(
        rows.iter().all(|r| r.split(',').nth(2) == Some("0")),
        "{csv}"
    );
    let cells = fs::read_to_string(dir.path().join("sweep_cells.csv")).unwrap();
    assert_eq!(data_rows(&cells).len(), 10);
}

#[test]
fn exit_code_mapping() {
    let ok = RunOutcome::default();
    assert_eq!(exit_code(&Ok(ok.clone())), 0);
    let refuted = RunOutcome {
        failures: vec!["inclusion refuted".into()],
        ..ok
    };
    assert_eq!(exit_code(&Ok(refuted)), 1);
    assert_eq!(
        exit_code(&Err(Error::Config {
            line: 1,
            msg: "x".into()
        })),
        2
    );
    assert_eq!(exit_code(&Err(Error::Numeric("x".into()))), 3);
    assert_eq!(exit_code(&Err(Error::Overflow("x".into()))), 3);
}
