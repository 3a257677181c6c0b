use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use curvcrit::config::{LambdaChoice, RunConfig};

fn curvcrit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvcrit"))
        .args(args)
        .output()
        .expect("run binary")
}

fn lambda_star(n: &str) -> f64 {
    let out = curvcrit(&["thresholds", "--n", n]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "lambda_star").unwrap();
    row[col].parse().unwrap()
}

#[test]
fn thresholds_prints_one_row() {
    let out = curvcrit(&["thresholds"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[0],
        "N,q,r,delta,K0,S,Sq,lambda,R0,R1,tau1,tau2,lambda_star,ps_bound"
    );
    let row: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row.len(), 14);
    assert_eq!(row[0], 3.0);
    // lambda defaults to lambda*/4
    assert_eq!(row[7], row[12] / 4.0);
    assert!(row[8] < row[9] && row[13] > 0.0);
}

#[test]
fn lambda_above_threshold_is_rejected() {
    let ls = lambda_star("9");
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("x");
    let out = curvcrit(&[
        "solve",
        "--n",
        "9",
        "--lambda",
        &format!("{}", 2.0 * ls),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda*"));
    assert!(!out_dir.join("solutions.csv").exists());
}

#[test]
fn unknown_key_names_itself() {
    let out = curvcrit(&["--set", "bogus=3", "thresholds", "--n", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn identical_runs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = curvcrit(&["solve", "--n", "9", "--out", d.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let single = dir.path().join("single");
    let out = Command::new(env!("CARGO_BIN_EXE_curvcrit"))
        .args(["solve", "--n", "9", "--out", single.to_str().unwrap()])
        .env("CURVCRIT_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    for name in [
        "solutions.csv",
        "thresholds.csv",
        "solution_0.field",
        "solution_1.field",
    ] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
        assert_eq!(
            read(&a, name),
            read(&single, name),
            "{name} with one thread"
        );
    }

    let s1 = dir.path().join("s1");
    let s2 = dir.path().join("s2");
    for d in [&s1, &s2] {
        let out = curvcrit(&[
            "sweep",
            "--n",
            "9",
            "--steps",
            "5",
            "--out",
            d.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(read(&s1, "sweep.csv"), read(&s2, "sweep.csv"));
    let text = String::from_utf8(read(&s1, "sweep.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "lambda,h1,linf,supgrad,ratio,J,residual,R0"
    );
    assert_eq!(text.lines().count(), 6);

    for d in [&a, &s1] {
        let out = curvcrit(&["verify", "--in", d.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let verify = String::from_utf8(read(d, "verify.csv")).unwrap();
        assert!(verify
            .lines()
            .skip(1)
            .all(|l| l.split(',').nth(3) == Some("true")));
    }
}

#[test]
fn config_round_trips_through_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let cfg_path = dir.path().join("in.txt");
    let text = format!(
        "# coarse run\nn = 7\nk = 1\ntol = 5e-9\nseed = 11\nsamples = 4\nfactor = 0.25\nout = {}\n",
        out_dir.display()
    );
    fs::write(&cfg_path, &text).unwrap();
    let out = curvcrit(&["--config", cfg_path.to_str().unwrap(), "solve"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let original = RunConfig::parse(&text).unwrap();
    let written =
        RunConfig::parse(&fs::read_to_string(out_dir.join("config.txt")).unwrap()).unwrap();
    let LambdaChoice::Value(lambda) = written.lambda else {
        panic!("lambda not recorded")
    };
    assert_eq!(
        RunConfig {
            lambda: LambdaChoice::Auto,
            ..written.clone()
        },
        original
    );
    assert_eq!(RunConfig::parse(&written.to_text()).unwrap(), written);

    let th = String::from_utf8(read(&out_dir, "thresholds.csv")).unwrap();
    let row: Vec<f64> = th
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(row[7], lambda);
}
