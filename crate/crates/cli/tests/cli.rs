use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn offpolicy(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_offpolicy")).current_dir(dir).args(args).output().unwrap()
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn run_writes_series_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--problem", "collision", "--algo", "etd", "--alpha", "0.00390625", "--lambda", "0", "--runs", "2"];
    ok(offpolicy(dir.path(), &args));
    let summary = String::from_utf8(read(dir.path(), "results/summary.json")).unwrap();
    assert!(summary.contains("\"auc\"") && summary.contains("\"final\""));
    let series = String::from_utf8(read(dir.path(), "results/series.csv")).unwrap();
    assert_eq!(series.lines().count(), 1 + 2 * 2000);
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let args = ["run", "--problem", "collision", "--algo", "td", "--alpha", "0.01", "--seed", "7", "--runs", "2", "--output", out];
        ok(offpolicy(dir.path(), &args));
        (read(dir.path(), &format!("{out}/series.csv")), read(dir.path(), &format!("{out}/summary.json")))
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn missing_key_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = offpolicy(dir.path(), &["run", "--problem", "collision", "--algo", "gtd", "--alpha", "0.01"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`alpha_h`"));
}

#[test]
fn config_file_is_validated_and_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "problem = collision\nflavour = mint\n").unwrap();
    let out = offpolicy(dir.path(), &["run", "--config", "bad.cfg"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown config key `flavour`"));

    fs::write(
        dir.path().join("run.cfg"),
        "# one TD point\nproblem = collision\nalgorithm = td\nalpha = 0.5\nruns = 1\nsteps = 500\noutput = fromfile\n",
    )
    .unwrap();
    ok(offpolicy(dir.path(), &["run", "--config", "run.cfg", "--alpha", "0.015625"]));
    let summary = String::from_utf8(read(dir.path(), "fromfile/summary.json")).unwrap();
    assert!(summary.contains("\"alpha\": 0.015625"));
}

#[test]
fn oracle_collision_values() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(offpolicy(dir.path(), &["oracle", "--problem", "collision"]));
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    for (i, row) in rows.iter().enumerate() {
        let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!((v - 0.9f64.powi(7 - i as i32)).abs() < 1e-12);
    }
}

#[test]
fn stepsize_plot_has_one_row_per_alpha() {
    let dir = tempfile::tempdir().unwrap();
    ok(offpolicy(dir.path(), &["sweep", "--problem", "collision", "--algo", "td", "--lambda", "0", "--runs", "2", "--steps", "1000"]));
    let text = ok(offpolicy(dir.path(), &["plotdata", "--kind", "stepsize"]));
    assert_eq!(text.lines().count(), 1 + 19);
    let curve = ok(offpolicy(dir.path(), &["plotdata", "--kind", "learning_curve", "--format", "json"]));
    assert!(curve.contains("\"mean_error\""));
}

fn family_final(report: &str, family: &str) -> f64 {
    let line = report.lines().find(|l| l.split_whitespace().nth(1) == Some(family)).unwrap();
    line.split_whitespace().nth(3).unwrap().parse().unwrap()
}

#[test]
fn report_ranks_etd_above_gtd_on_collision() {
    let dir = tempfile::tempdir().unwrap();
    ok(offpolicy(dir.path(), &["sweep", "--problem", "collision", "--algo", "etd,gtd", "--lambda", "0", "--runs", "5"]));
    let report = ok(offpolicy(dir.path(), &["report", "--criterion", "final"]));
    assert!(family_final(&report, "etd(0)") < family_final(&report, "gtd(0)"));
    assert!(dir.path().join("results/sensitivity_final.csv").exists());

    let cells = |criterion| {
        let text = ok(offpolicy(dir.path(), &["report", "--all", "--criterion", criterion]));
        let mut rows: Vec<String> = text
            .lines()
            .filter(|l| l.contains("collision/"))
            .map(|l| l.split_whitespace().skip(2).collect::<Vec<_>>().join(" "))
            .collect();
        rows.sort();
        rows
    };
    assert_eq!(cells("auc"), cells("final"));
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = |workers: &str, out: &str| {
        let args = ["sweep", "--problem", "fourrooms", "--algo", "tb", "--alpha", "0.5,0.25", "--runs", "3", "--steps", "800", "--output", out];
        let status = Command::new(env!("CARGO_BIN_EXE_offpolicy"))
            .current_dir(dir.path())
            .env("OFFPOLICY_WORKERS", workers)
            .args(args)
            .output()
            .unwrap();
        ok(status);
        (read(dir.path(), &format!("{out}/series.csv")), read(dir.path(), &format!("{out}/summary.json")))
    };
    assert_eq!(sweep("1", "one"), sweep("8", "eight"));
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!offpolicy(dir.path(), &["report", "--results", "nowhere"]).status.success());
    fs::create_dir(dir.path().join("broken")).unwrap();
    fs::write(dir.path().join("broken/summary.json"), "{\"cells\": 3}").unwrap();
    let out = offpolicy(dir.path(), &["plotdata", "--results", "broken", "--kind", "sensitivity"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("summary.json"));
    let zero = Command::new(env!("CARGO_BIN_EXE_offpolicy"))
        .current_dir(dir.path())
        .env("OFFPOLICY_WORKERS", "0")
        .args(["run", "--problem", "collision", "--algo", "td", "--alpha", "0.1"])
        .output()
        .unwrap();
    assert!(!zero.status.success());
    let alt = offpolicy(dir.path(), &["sweep", "--problem", "fourrooms", "--algo", "altlife"]);
    assert!(!alt.status.success());
}
