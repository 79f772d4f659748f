use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn drperf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drperf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(name: &str) -> String {
    scenarios().join(name).to_string_lossy().into_owned()
}

/// Writes an edited copy of a bundled scenario whose data paths still
/// resolve to the bundled files.
fn variant(dir: &TempDir, base: &str, edit: impl Fn(String) -> String) -> String {
    let text = fs::read_to_string(scenarios().join(base)).unwrap();
    let data = scenarios().join("data");
    let text = text.replace("\"data/", &format!("\"{}/", data.display()));
    let path = dir.path().join(base);
    fs::write(&path, edit(text)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn simulate_prints_derived_variables() {
    let o = drperf(&["simulate", &fixture("hybrid.toml")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("54.2224"), "{out}");
    assert!(out.contains("0.0209648"));
    assert!(out.contains("1.57912"));
    assert!(out.contains("note: reliability mission time 372 h"));
}

#[test]
fn commands_are_deterministic() {
    for args in [
        vec!["simulate", "--series"],
        vec!["compare", "--format", "csv"],
    ] {
        let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        full.push(fixture("hybrid.toml"));
        if args[0] == "compare" {
            full.push(fixture("cloud.toml"));
        }
        let full: Vec<&str> = full.iter().map(String::as_str).collect();
        let a = drperf(&full);
        let b = drperf(&full);
        assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn project_uses_flag_or_scenario_volume() {
    let o = drperf(&["project", &fixture("hybrid.toml")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("2.72034") && out.contains("38.0161") && out.contains("3.09238"),
        "{out}"
    );

    let o = drperf(&["project", &fixture("cloud.toml"), "--test-data-mb", "1000"]);
    assert!(stdout(&o).contains("projection for 1000 MB"));

    let dir = TempDir::new().unwrap();
    let path = variant(&dir, "hybrid.toml", |t| {
        t.replace("test_data_mb = 531012\n", "")
    });
    let o = drperf(&["project", &path]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--test-data-mb"));
}

#[test]
fn cost_and_reliability() {
    let out = stdout(&drperf(&["cost", &fixture("cloud.toml")]));
    assert!(out.contains("7.82701") && out.contains("43.7893"), "{out}");

    let out = stdout(&drperf(&["reliability", &fixture("hybrid.toml")]));
    assert!(
        out.contains("0.993952") && out.contains("0.967185"),
        "{out}"
    );
    let out = stdout(&drperf(&[
        "reliability",
        &fixture("hybrid.toml"),
        "--mission-h",
        "360",
    ]));
    assert!(out.contains("over 360 h"), "{out}");
}

#[test]
fn bia_check_exit_codes() {
    let o = drperf(&["bia-check", &fixture("hybrid.toml")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("restore time (archive)"));

    let dir = TempDir::new().unwrap();
    let relaxed = variant(&dir, "hybrid.toml", |t| {
        t.replace("rto_target_hours = 5", "rto_target_hours = 48")
    });
    let o = drperf(&["bia-check", &relaxed]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn compare_renders_text_and_csv() {
    let o = drperf(&["compare", &fixture("hybrid.toml"), &fixture("cloud.toml")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("backup throughput (daily backup)"));
    assert!(out.contains("note: cloud: job1 throughput: using supplied average 2.57731"));

    let o = drperf(&[
        "--format",
        "csv",
        "compare",
        &fixture("hybrid.toml"),
        &fixture("cloud.toml"),
    ]);
    let out = stdout(&o);
    assert!(out.starts_with("metric,unit,hybrid,cloud\n"), "{out}");
    assert!(out.contains("backup throughput (job1),MB/s,/,2.57731"));
    assert!(!out.contains("note:"));
}

#[test]
fn compare_rejects_mismatched_volumes() {
    let dir = TempDir::new().unwrap();
    let other = variant(&dir, "cloud.toml", |t| {
        t.replace("test_data_mb = 531012", "test_data_mb = 1000")
    });
    let o = drperf(&["compare", &fixture("hybrid.toml"), &other]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("test data"), "{}", stderr(&o));

    let o = drperf(&[
        "compare",
        &fixture("hybrid.toml"),
        &other,
        "--test-data-mb",
        "5000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn invalid_scenarios_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let mismatch = variant(&dir, "hybrid.toml", |t| {
        t.replace("kind = \"object_store\"", "kind = \"vault\"")
    });
    let o = drperf(&["simulate", &mismatch]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));

    let o = drperf(&["simulate", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn plot_writes_svg() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("transfer.svg");
    let o = drperf(&[
        "plot",
        &fixture("cloud.toml"),
        "--component",
        "DailyTransfer",
        "--out",
        &out.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let svg = fs::read_to_string(&out).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert!(svg.contains(">period<") && svg.contains("DailyTransfer (MB)"));

    let missing: &Path = &dir.path().join("no/such/dir/x.svg");
    let o = drperf(&[
        "plot",
        &fixture("cloud.toml"),
        "--component",
        "DailyTransfer",
        "--out",
        &missing.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = drperf(&[
        "plot",
        &fixture("hybrid.toml"),
        "--component",
        "Nope",
        "--out",
        &out.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
