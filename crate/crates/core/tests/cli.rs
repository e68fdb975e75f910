use std::fs;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity-ghz")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&["run", "--n", "1"]).status.code(), Some(2));
    assert_eq!(cli(&["run", "--n", "2", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(cli(&["sweep", "--preset", "rydberg_atom"]).status.code(), Some(2));
    assert_eq!(cli(&[]).status.code(), Some(2));
    assert_eq!(cli(&["run", "--n", "2", "--b", "50", "--mode", "ideal"]).status.code(), Some(0));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn unconverged_cutoff_exits_3() {
    // Two photons in one cavity matter at small b, so cutoff 2 disagrees with 3.
    let out = cli(&["run", "--n", "3", "--b", "10", "--mode", "coherent", "--fock-cutoff", "2", "--check-cutoff", "true"]);
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
}

#[test]
fn sweep_grid_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let out = cli(&[
        "sweep",
        "--n-list",
        "2,3,4",
        "--b-list",
        "40:100:5",
        "--mode",
        "ideal",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,b,g_cross_ratio,fidelity,tau_seconds,dt_used,trace_drift"));
    assert_eq!(lines.count(), 39);
}

#[test]
fn jsonl_output_has_one_object_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.jsonl");
    let out = cli(&[
        "sweep",
        "--n-list",
        "2",
        "--b-list",
        "20,40",
        "--mode",
        "ideal",
        "--format",
        "jsonl",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = fs::read_to_string(&path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["b"], 40.0);
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for jobs in ["1", "3"] {
        let path = dir.path().join(format!("j{jobs}.csv"));
        let out = cli(&[
            "sweep",
            "--n-list",
            "2,3",
            "--b-list",
            "30,60",
            "--mode",
            "coherent",
            "--jobs",
            jobs,
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        files.push(fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn dumped_config_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("base.conf");
    fs::write(&cfg, "# two cavities\nn = 2\nb = 35\nmode = coherent\nt_d = 2e-9\n").unwrap();
    let dump = dir.path().join("dump.conf");
    let trace = dir.path().join("trace.csv");
    let first = cli(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--dt-factor",
        "60",
        "--dump-config",
        dump.to_str().unwrap(),
        "--output",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(first.status.code(), Some(0));
    let trace_first = fs::read(&trace).unwrap();
    let second = cli(&["run", "--config", dump.to_str().unwrap()]);
    assert_eq!(stdout(&first), stdout(&second));
    assert_eq!(fs::read(&trace).unwrap(), trace_first);
    let dumped = fs::read_to_string(&dump).unwrap();
    assert!(dumped.contains("dt_factor = 60.0") && dumped.contains("t_d = 2e-9"), "{dumped}");
}

#[test]
fn budget_reports_paper_scales() {
    let out = stdout(&cli(&["budget", "--preset", "rydberg_atom", "--n", "10"]));
    assert!(out.contains("tau = 7.5000e-5 s"), "{out}");
    assert!(out.contains("T_cav = 3.1146e-3 s"), "{out}");
    let out = stdout(&cli(&["budget", "--n", "4", "--b", "85"]));
    assert!(out.contains("Q = 7.9168e5"));
    let rows = out.lines().filter(|l| l.split_whitespace().count() == 3 && l.starts_with("  ")).count();
    assert_eq!(rows, 4 * 3);
}

#[test]
fn schedule_prints_preparation_separately() {
    let out = stdout(&cli(&["schedule", "--n", "2"]));
    assert!(out.lines().nth(1).unwrap().contains("prep:pulse20(phi=-pi/2)"));
    assert!(out.contains("total = 4.414087e-8 s"));
}
