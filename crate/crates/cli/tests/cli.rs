use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use randomizer_cli::{run, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_randomizer"));
    cmd.env_remove("RANDOMIZER_THREADS");
    cmd
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_args(args: &[&str]) -> i32 {
    run(std::iter::once("randomizer").chain(args.iter().copied()))
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn json(path: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SUBCOMMANDS: [(&str, &[&str]); 7] = [
    ("sample-channel", &["--dim", "--count", "--kind", "--seed", "--out"]),
    (
        "verify",
        &[
            "--channel", "--epsilon", "--delta", "--net", "--implicit-net", "--stop-k", "--report", "--timings",
            "--seed", "--restarts", "--tol", "--max-iters",
        ],
    ),
    ("net", &["--dim", "--delta", "--stop-k", "--seed", "--out"]),
    ("audit-net", &["--net", "--trials", "--seed", "--out"]),
    ("concentration", &["--dim", "--count", "--delta", "--trials", "--pair", "--seed", "--out"]),
    (
        "sweep",
        &[
            "--grid", "--dims", "--epsilons", "--counts", "--channels", "--stop-k", "--implicit-when-infeasible",
            "--seed", "--restarts", "--tol", "--max-iters", "--out", "--json",
        ],
    ),
    ("bounds", &["--dim", "--epsilon", "--c", "--C", "--out"]),
];

#[test]
fn help_on_every_subcommand_lists_all_flags() {
    let top = exec(&["--help"]);
    assert!(top.status.success());
    let text = String::from_utf8(top.stdout).unwrap();
    for (name, flags) in SUBCOMMANDS {
        assert!(text.contains(name), "{name} missing from top-level help");
        let out = exec(&[name, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{name} --help");
        let help = String::from_utf8(out.stdout).unwrap();
        for flag in flags.iter().chain(&["--threads", "--verbose"]) {
            assert!(help.contains(flag), "{name} --help does not document {flag}");
        }
    }
    assert_eq!(run_args(&["--version"]), EXIT_OK);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run_args(&[]), EXIT_USAGE);
    assert_eq!(run_args(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(run_args(&["bounds", "--dim", "2", "--epsilon", "0.5", "--bogus"]), EXIT_USAGE);
    assert_eq!(run_args(&["bounds", "--dim", "0", "--epsilon", "0.5"]), EXIT_USAGE);
    assert_eq!(run_args(&["bounds", "--dim", "2", "--epsilon", "1.5"]), EXIT_USAGE);
    assert_eq!(run_args(&["bounds", "--dim", "2"]), EXIT_USAGE);
    assert_eq!(run_args(&["verify", "--channel", "x.json", "--epsilon", "0.5", "--delta", "0.5"]), EXIT_USAGE);
    assert_eq!(run_args(&["sample-channel", "--dim", "2", "--out", "x.json"]), EXIT_USAGE);
    assert_eq!(run_args(&["sample-channel", "--dim", "2", "--kind", "weyl", "--count", "3", "--out", "x.json"]), EXIT_USAGE);
    assert_eq!(run_args(&["sweep", "--dims", "2"]), EXIT_USAGE);
    assert_eq!(run_args(&["bounds", "--dim", "2", "--epsilon", "0.5", "--threads", "0"]), EXIT_USAGE);
    let out = exec(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("Usage"));
}

#[test]
fn runtime_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = p(dir.path(), "missing.json");
    assert_eq!(run_args(&["verify", "--channel", &missing, "--epsilon", "0.5"]), EXIT_RUNTIME);
    let out = exec(&["audit-net", "--net", &missing]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("missing.json"));

    let broken = p(dir.path(), "broken.json");
    fs::write(&broken, "{\"schema\":\"ruc-1\",").unwrap();
    assert_eq!(run_args(&["verify", "--channel", &broken, "--epsilon", "0.5"]), EXIT_RUNTIME);

    let net = p(dir.path(), "net.json");
    assert_eq!(run_args(&["net", "--dim", "2", "--delta", "0.5", "--seed", "1", "--out", &net]), EXIT_OK);
    let ch = p(dir.path(), "ch.json");
    assert_eq!(run_args(&["sample-channel", "--dim", "2", "--count", "3", "--seed", "1", "--out", &ch]), EXIT_OK);
    // a δ = 1/2 net cannot be lifted
    assert_eq!(run_args(&["verify", "--channel", &ch, "--epsilon", "0.5", "--net", &net]), EXIT_RUNTIME);
    // nets beyond the memory guard are refused
    let big = p(dir.path(), "big.json");
    assert_eq!(run_args(&["net", "--dim", "8", "--delta", "0.01", "--out", &big]), EXIT_RUNTIME);
    assert!(!Path::new(&big).exists());
}

#[test]
fn documented_examples() {
    let dir = tempfile::tempdir().unwrap();
    let ch = p(dir.path(), "ch.json");
    let out = exec(&["sample-channel", "--dim", "4", "--count", "16", "--seed", "7", "--out", &ch]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
    let v = json(&ch);
    assert_eq!(v["schema"], "ruc-1");
    assert_eq!(v["dim"], 4);
    assert_eq!(v["count"], 16);
    assert_eq!(v["seed"], 7);
    let us = v["unitaries"].as_array().unwrap();
    assert_eq!(us.len(), 16);
    for u in us {
        let entries = u.as_array().unwrap();
        assert_eq!(entries.len(), 16);
        assert!(entries.iter().all(|e| e.as_array().unwrap().len() == 2));
    }

    let cert = p(dir.path(), "cert.json");
    assert_eq!(run_args(&["verify", "--channel", &ch, "--epsilon", "0.5", "--report", &cert]), EXIT_OK);
    let c = json(&cert);
    assert_eq!(c["delta"], 0.125);
    assert!(["CertifiedRandomizing", "CertifiedNotRandomizing", "Undetermined"]
        .contains(&c["verdict"].as_str().unwrap()));
    assert!(c["timings"].is_null());
    assert!(c["A_lower"].as_f64().unwrap() <= c["A_upper"].as_f64().unwrap());

    let out = exec(&["bounds", "--dim", "2", "--epsilon", "0.5"]);
    assert!(out.status.success());
    let b: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(b["d"], 2);
    assert_eq!(b["epsilon"], 0.5);
    assert_eq!(b["C"], 150.0);
    assert_eq!(b["required_N"], 832);
    assert_eq!(b["min_N_for_success"], 13304);
    assert!(b["failure_log_bound_at_required_N"].as_f64().unwrap() > 0.0);
    assert!((b["c"].as_f64().unwrap() - 1.0 / (6.0 * std::f64::consts::LN_2)).abs() < 1e-15);
}

#[test]
fn weyl_channel_is_certified() {
    let dir = tempfile::tempdir().unwrap();
    let ch = p(dir.path(), "w.json");
    assert_eq!(run_args(&["sample-channel", "--dim", "2", "--kind", "weyl", "--out", &ch]), EXIT_OK);
    let cert = p(dir.path(), "c.json");
    let args = ["verify", "--channel", &ch, "--epsilon", "0.5", "--seed", "3", "--report", &cert];
    assert_eq!(run_args(&args), EXIT_OK);
    assert_eq!(json(&cert)["verdict"], "CertifiedRandomizing");
}

/// Runs `args` twice, each time in a fresh directory, and compares the named outputs.
fn assert_byte_identical(args: &[&str], outputs: &[&str]) {
    let runs: Vec<Vec<Vec<u8>>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let status = bin().current_dir(dir.path()).args(args).status().unwrap();
            assert!(status.success(), "{args:?}");
            outputs.iter().map(|f| fs::read(dir.path().join(f)).unwrap()).collect()
        })
        .collect();
    assert_eq!(runs[0], runs[1], "{args:?}");
}

#[test]
fn reruns_are_byte_identical() {
    assert_byte_identical(&["sample-channel", "--dim", "3", "--count", "5", "--seed", "9", "--out", "ch.json"], &["ch.json"]);
    assert_byte_identical(&["net", "--dim", "2", "--delta", "0.3", "--seed", "9", "--out", "net.json"], &["net.json"]);
    assert_byte_identical(
        &["concentration", "--dim", "3", "--count", "10,20", "--delta", "0.5", "--trials", "200", "--pair", "random",
          "--seed", "9", "--out", "c.csv"],
        &["c.csv"],
    );
    assert_byte_identical(
        &["sweep", "--dims", "2", "--epsilons", "0.9", "--counts", "8,32", "--channels", "2", "--restarts", "4",
          "--seed", "9", "--out", "s.csv", "--json", "s.json"],
        &["s.csv", "s.json"],
    );
    assert_byte_identical(&["bounds", "--dim", "3", "--epsilon", "0.3", "--out", "b.json"], &["b.json"]);

    let dir = tempfile::tempdir().unwrap();
    let ch = p(dir.path(), "ch.json");
    let net = p(dir.path(), "net.json");
    assert_eq!(run_args(&["sample-channel", "--dim", "2", "--count", "6", "--seed", "2", "--out", &ch]), EXIT_OK);
    assert_eq!(run_args(&["net", "--dim", "2", "--delta", "0.2", "--seed", "2", "--out", &net]), EXIT_OK);
    assert_byte_identical(
        &["verify", "--channel", &ch, "--epsilon", "0.6", "--net", &net, "--seed", "4", "--report", "cert.json"],
        &["cert.json"],
    );
    assert_byte_identical(
        &["verify", "--channel", &ch, "--epsilon", "0.6", "--seed", "4", "--report", "cert.json"],
        &["cert.json"],
    );
    assert_byte_identical(&["audit-net", "--net", &net, "--trials", "3000", "--seed", "4", "--out", "a.json"], &["a.json"]);
}

#[test]
fn thread_count_does_not_change_results() {
    let runs: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            let status = bin()
                .current_dir(dir.path())
                .env("RANDOMIZER_THREADS", threads)
                .args(["concentration", "--dim", "2", "--count", "7", "--delta", "0.4", "--trials", "3000", "--seed", "1",
                       "--out", "c.csv"])
                .status()
                .unwrap();
            assert!(status.success());
            fs::read(dir.path().join("c.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let out = bin().env("RANDOMIZER_THREADS", "zero").args(["bounds", "--dim", "2", "--epsilon", "0.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generated_seed_is_reported_and_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let first = p(dir.path(), "a.json");
    let out = exec(&["sample-channel", "--dim", "2", "--count", "3", "--out", &first]);
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    let seed = line
        .split("seed=")
        .nth(1)
        .and_then(|rest| rest.split(|c: char| !c.is_ascii_digit()).next())
        .expect("seed in summary");
    assert!(line.contains("(generated)"));
    let second = p(dir.path(), "b.json");
    assert_eq!(run_args(&["sample-channel", "--dim", "2", "--count", "3", "--seed", seed, "--out", &second]), EXIT_OK);
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn sweep_grid_file() {
    let dir = tempfile::tempdir().unwrap();
    let grid = p(dir.path(), "grid.json");
    fs::write(&grid, r#"{"dims":[1,2],"epsilons":[0.1],"counts":[1],"channels_per_cell":2,"seed":5}"#).unwrap();
    let csv = p(dir.path(), "s.csv");
    assert_eq!(run_args(&["sweep", "--grid", &grid, "--out", &csv]), EXIT_OK);
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "d,epsilon,N,channels,frac_certified,frac_not,frac_undetermined,mean_A_upper,mean_A_lower,seed");
    // d = 1 is trivially randomizing; a single unitary at d = 2 is not 0.1-randomizing
    assert!(rows[1].starts_with("1,0.1,1,2,1,0,0,"), "{}", rows[1]);
    assert!(rows[2].starts_with("2,0.1,1,2,0,1,0,"), "{}", rows[2]);
    assert!(rows.iter().skip(1).all(|r| r.ends_with(",5")));
    assert_eq!(run_args(&["sweep", "--grid", &grid, "--dims", "2"]), EXIT_USAGE);
    fs::write(&grid, r#"{"dims":[2],"epsilons":[0.1]}"#).unwrap();
    assert_eq!(run_args(&["sweep", "--grid", &grid]), EXIT_RUNTIME);
}
