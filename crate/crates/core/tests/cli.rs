use std::process::{Command, Output};

fn bell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triad-bell"))
        .args(args)
        .env_remove("BELL_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sweep_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = bell(&[
        "sweep",
        "--n",
        "2",
        "--gamma-min",
        "0.84",
        "--gamma-max",
        "1.0",
        "--steps",
        "17",
        "--samples",
        "2000",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "gamma,n_parties,samples,violations,p_hat,std_error"
    );
    assert_eq!(lines.len(), 18);
    assert!(lines[1].starts_with("0.84,2,2000,"));
    assert!(lines[17].starts_with("1,2,2000,2000,1,0"));
}

#[test]
fn probability_as_json() {
    let o = bell(&[
        "probability",
        "--n",
        "2",
        "--gamma",
        "0.8",
        "--samples",
        "1000",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows[0]["violations"], 0);
    assert_eq!(rows[0]["samples"], 1000);
}

#[test]
fn bound_and_threshold_values() {
    assert_eq!(
        stdout(&bell(&["bound", "--gamma", "0.98"])).trim(),
        "8.40e-4"
    );
    assert_eq!(
        stdout(&bell(&["threshold", "--n", "2"])).trim(),
        "0.840896415254"
    );
}

#[test]
fn integral_command() {
    let o = bell(&["integral", "--gamma", "1.0", "--resolution", "64"]);
    assert_eq!(stdout(&o), "gamma,resolution,p\n1,64,1\n");
}

#[test]
fn verify_suites() {
    let o = bell(&["verify", "--suite", "oracle", "--n", "4", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["passed"], true);

    let o = bell(&[
        "verify",
        "--suite",
        "oracle",
        "--n",
        "3",
        "--trials",
        "5",
        "--printed-coefficient",
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = bell(&["verify", "--suite", "region", "--trials", "2000"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors() {
    assert_eq!(
        bell(&["probability", "--n", "2", "--gamma", "1.2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(bell(&["sweep", "--n", "2"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_triad-bell"))
        .args(["threshold", "--n", "2"])
        .env("BELL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_cap_keeps_results() {
    let args = [
        "probability",
        "--n",
        "3",
        "--gamma",
        "0.85",
        "--samples",
        "5000",
        "--seed",
        "3",
    ];
    let free = bell(&args);
    let capped = Command::new(env!("CARGO_BIN_EXE_triad-bell"))
        .args(args)
        .env("BELL_THREADS", "1")
        .output()
        .unwrap();
    assert!(capped.status.success());
    assert_eq!(free.stdout, capped.stdout);
}
