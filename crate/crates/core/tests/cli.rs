use std::path::Path;
use std::process::Command;

const SMALL: &str = "\
# small LI run
preset = li
width = 30
height = 12
border_rows = 2
population = 60
total_steps = 300
stimulus_start = 100
stimulus_end = 200
snapshot_interval = 100
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plasmodium"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_writes_the_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", SMALL);
    let out = dir.path().join("out");
    let res = bin()
        .args(["run", "--config", &cfg, "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("contrast peak"));
    assert!(stdout.contains("recovery step"));
    assert!(stdout.contains("onset columns"));

    for f in ["density.csv", "spacetime.pgm", "summary.json", "config.txt"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    for k in [0, 100, 200, 300] {
        assert!(out.join(format!("snapshots/step_{k}.pgm")).is_file());
    }
    let csv = std::fs::read_to_string(out.join("density.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 31);

    // The echoed config reproduces the run exactly.
    let echo = out.join("config.txt");
    let again = dir.path().join("again");
    let res = bin()
        .args(["run", "--config", echo.to_str().unwrap(), "--out", again.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0));
    for f in ["density.csv", "summary.json"] {
        assert_eq!(
            std::fs::read(out.join(f)).unwrap(),
            std::fs::read(again.join(f)).unwrap(),
            "{f} differs between runs"
        );
    }
}

#[test]
fn seed_flag_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", SMALL);
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let res = bin()
            .args(["run", "--config", &cfg, "--seed", seed, "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(res.status.code(), Some(0));
        (
            std::fs::read(out.join("density.csv")).unwrap(),
            std::fs::read_to_string(out.join("config.txt")).unwrap(),
        )
    };
    let (a, echo) = run("11", "a");
    let (b, _) = run("12", "b");
    assert_ne!(a, b);
    assert!(echo.contains("seed = 11"));
}

#[test]
fn missing_config_exits_2() {
    let res = bin().args(["run", "--config", "missing.cfg"]).output().unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(!res.stderr.is_empty());
}

#[test]
fn validate_lists_violations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "preset = li\ndecay = 2\npopulation = 30000\n");
    let res = bin().args(["validate", "--config", &cfg]).output().unwrap();
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8(res.stderr).unwrap();
    assert!(err.contains("decay"));
    assert!(err.contains("capacity"));
}

#[test]
fn type_errors_exit_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "preset = li\n\ndecay = banana\n");
    let res = bin().args(["run", "--config", &cfg]).output().unwrap();
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8(res.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("decay"), "{err}");
}

#[test]
fn invalid_config_does_not_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "preset = li\nsample_interval = 0\n");
    let out = dir.path().join("out");
    let res = bin()
        .args(["run", "--config", &cfg, "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}
