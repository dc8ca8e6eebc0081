use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_clausius-lab");

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("CLAUSIUS_LAB_THREADS")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn empty_scenario_is_a_parse_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.cfg"), "temperature = 1\nscenario =\n").unwrap();
    let o = run(&["run", "--config", "c.cfg", "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 2") && err.contains("scenario"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_key_and_duplicate_key_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.cfg"), "scenario = moments\ntemprature = 1\n").unwrap();
    std::fs::write(dir.path().join("b.cfg"), "scenario = moments\nseed = 1\nseed = 2\n").unwrap();
    for cfg in ["a.cfg", "b.cfg"] {
        let o = run(&["run", "--config", cfg, "--out", "out"], dir.path());
        assert_eq!(o.status.code(), Some(2), "{cfg}: {}", stderr(&o));
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.cfg"),
        "scenario = moments\ntemperature = 1\ndamping = 1\ncutoff = 50\nout = from-file\n",
    )
    .unwrap();
    let o = run(&["run", "--config", "c.cfg", "--out", "from-flag", "--set", "damping=0.1,5"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!dir.path().join("from-file").exists());
    let csv = std::fs::read_to_string(dir.path().join("from-flag/moments.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn moments_csv_follows_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["moments", "--out", "o", "--svg", "--bits"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("o/moments.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.first(), Some(&"temperature"));
    assert!(header.contains(&"entropy_bits"));
    assert_eq!(&header[header.len() - 2..], ["status", "message"]);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 50);
    for row in &rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), header.len());
        assert_eq!(cells[header.len() - 2], "ok");
        let f1 = cells[header.iter().position(|h| *h == "f1").unwrap()];
        let (mantissa, _) = f1.split_once('e').unwrap();
        assert!(mantissa.trim_start_matches('-').len() >= 11, "{f1}");
        assert!(!row.to_lowercase().contains("nan"));
    }
    let svg = std::fs::read_to_string(dir.path().join("o/moments.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn failed_points_become_error_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "violation-scan", "--out", "o", "--grid", "9", "--set", "temperature=0.05,1", "--set", "damping=5",
            "--set", "cutoff=200", "--set", "mass_factor=1e4",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let csv = std::fs::read_to_string(dir.path().join("o/violation_scan.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    let failed = rows.iter().filter(|r| r.contains(",error,")).count();
    assert!(failed >= 1, "{csv}");
    for r in rows.iter().filter(|r| r.contains(",error,")) {
        assert!(r.contains("heat quadrature"), "{r}");
        assert!(!r.to_lowercase().contains("nan"));
    }
}

#[test]
fn violation_scan_flags_the_low_temperature_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["violation-scan", "--out", "o", "--set", "temperature=0.05", "--set", "damping=0,5", "--set", "cutoff=100"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("o/violation_scan.csv")).unwrap();
    let flags: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|r| if r.contains("VIOLATION(APPARENT)") { "v" } else { "c" })
        .collect();
    assert_eq!(flags, ["c", "v"]);
}

#[test]
fn holevo_reads_an_ensemble_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("e.txt"),
        "2 2\n0.5\n1+0j 0+0j\n0+0j 0+0j\n0.5\n0.5+0j 0.5+0j\n0.5+0j 0.5+0j\n",
    )
    .unwrap();
    let o = run(&["holevo", "--set", "ensemble=e.txt", "--out", "o", "--seed", "7"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("o/holevo.csv")).unwrap();
    let chi = csv
        .lines()
        .find(|l| l.starts_with("holevo_chi_nats,"))
        .and_then(|l| l.split(',').nth(1))
        .unwrap();
    assert!((chi.parse::<f64>().unwrap() - 0.4165).abs() < 1e-4, "{csv}");
    assert!(dir.path().join("o/holevo_povm.csv").exists());
}

#[test]
fn bad_ensemble_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("e.txt"),
        "2 2\n0.7\n1+0j 0+0j\n0+0j 0+0j\n0.2\n0+0j 0+0j\n0+0j 1+0j\n",
    )
    .unwrap();
    let o = run(&["holevo", "--set", "ensemble=e.txt", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 5") && err.contains("probabilities sum 0.9"), "{err}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn thread_cap_must_be_a_positive_integer() {
    let dir = tempfile::tempdir().unwrap();
    for bad in ["0", "many"] {
        let o = Command::new(BIN)
            .args(["moments", "--out", "o"])
            .current_dir(dir.path())
            .env("CLAUSIUS_LAB_THREADS", bad)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
    let o = Command::new(BIN)
        .args(["resolve", "--out", "o"])
        .current_dir(dir.path())
        .env("CLAUSIUS_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn seeded_holevo_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for out in ["a", "b"] {
        let o = run(&["holevo", "--out", out, "--seed", "42"], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        seen.push(std::fs::read(dir.path().join(out).join("holevo.csv")).unwrap());
    }
    assert_eq!(seen[0], seen[1]);
}
