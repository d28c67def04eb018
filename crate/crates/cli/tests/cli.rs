use std::process::{Command, Output};

fn lowsync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowsync"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn identity_matrix_converges_in_one_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("eye.mtx");
    std::fs::write(
        &mtx,
        "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n",
    )
    .unwrap();
    let csv = dir.path().join("h.csv");
    let json = dir.path().join("s.json");
    let out = lowsync(&[
        "--matrix",
        mtx.to_str().unwrap(),
        "--rhs",
        "ones-image",
        "--method",
        "cgs2",
        "--csv",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 2);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(summary["iterations"], 1);
    assert_eq!(summary["outcome"], "converged");
    assert_eq!(summary["seed"], serde_json::Value::Null);
}

#[test]
fn simoncini_mgs_stalls_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("s.json");
    let plot = dir.path().join("mgs.dat");
    let out = lowsync(&[
        "--problem",
        "simoncini:100,1e-8",
        "--rhs",
        "random:42",
        "--method",
        "mgs-l1",
        "--restart",
        "100",
        "--max-restarts",
        "0",
        "--tol",
        "1e-14",
        "--json",
        json.to_str().unwrap(),
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(summary["outcome"], "stalled_maxiter");
    let stall = summary["stall_iteration"].as_u64().unwrap();
    assert!((70..=90).contains(&stall), "stall at {stall}");
    assert_eq!(summary["config"]["restart"], 100);
    assert_eq!(summary["seed"], 42);
    let dat = std::fs::read_to_string(&plot).unwrap();
    assert!(dat.starts_with("# method: mgs-l1\n# problem: simoncini(100, 1e-8)\n"));
}

#[test]
fn ghysels_on_simoncini_exits_3() {
    let out = lowsync(&[
        "--problem",
        "simoncini",
        "--method",
        "cgs1-ghysels",
        "--restart",
        "100",
        "--max-restarts",
        "0",
        "--tol",
        "1e-14",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("cancellation_failure"));
}

#[test]
fn usage_errors_exit_1() {
    let out = lowsync(&["--bogus"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage: lowsync"));

    let cases: [&[&str]; 6] = [
        &["--bogus"],
        &[],
        &["--problem", "simoncini", "--matrix", "a.mtx"],
        &["--problem", "simoncini", "--method", "householder"],
        &["--problem", "simoncini", "--rhs", "zeros"],
        &["--problem", "simoncini", "--precond", "ilu"],
    ];
    for args in cases {
        let out = lowsync(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error:"), "{args:?}");
    }
}

#[test]
fn unreadable_matrix_exits_1() {
    let out = lowsync(&["--matrix", "/nonexistent/none.mtx"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("none.mtx"));
}

#[test]
fn help_exits_0() {
    let out = lowsync(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--matrix", "--problem", "--rhs", "--method", "--restart", "--max-restarts", "--tol", "--precond", "--csv", "--json", "--diag-every"] {
        assert!(text.contains(flag), "{flag}");
    }
}
