use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn flockcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flockcert"))
        .args(args)
        .env_remove("FLOCKCERT_JOBS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<String> {
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].clone()).collect()
}

const EXP: [&str; 6] = ["--dist", "exponential:mu=0.05", "--lambda", "1", "--beta", "0.5"];

#[test]
fn check_exit_codes() {
    let ok = flockcert(&[&["check"], &EXP[..], &["--v0", "0.01"]].concat());
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&ok)).unwrap();
    assert_eq!(json["feasible"], true);
    assert!(json["kappa_star"].as_f64().unwrap() > 0.0);
    assert!(json.get("critical_v0_numeric").is_some());
    assert!(json.get("critical_v0_paper").is_some());

    let big = flockcert(&[&["check"], &EXP[..], &["--v0", "1e6"]].concat());
    assert_eq!(code(&big), 3);
    let json: serde_json::Value = serde_json::from_str(&stdout(&big)).unwrap();
    assert_eq!(json["feasible"], false);

    let bad = flockcert(&["check", "--dist", "gamma:k=2", "--lambda", "1", "--beta", "0.5", "--v0", "1"]);
    assert_eq!(code(&bad), 2);
    let neg = flockcert(&[&["check"], &EXP[..], &["--v0", "-1"]].concat());
    assert_eq!(code(&neg), 2);
    let none = flockcert(&[&["check"], &EXP[..]].concat());
    assert_eq!(code(&none), 2);
}

#[test]
fn check_from_drawn_swarm() {
    let out = flockcert(&[
        &["check"],
        &EXP[..],
        &["--N", "6", "--d", "3", "--seed", "2", "--vel-dispersion", "0.01"],
    ]
    .concat());
    assert_eq!(code(&out), 0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let v0 = json["input"]["v0"].as_f64().unwrap();
    let d0 = json["input"]["d0"].as_f64().unwrap();
    assert!(d0 > 0.0 && d0 <= v0);
    assert_eq!(json["input"]["weak"], false);
}

#[test]
fn critical_curves() {
    let out = flockcert(&["critical", "--fig", "fig1"]);
    assert_eq!(code(&out), 0);
    let (header, rows) = read_csv(&stdout(&out));
    assert_eq!(header.len(), 3);
    let last = rows.last().unwrap();
    assert_eq!(last[1].parse::<f64>().unwrap(), 0.0);

    for fig in ["fig2", "fig3", "fig4"] {
        let out = flockcert(&["critical", "--fig", fig, "--grid", "0.01:0.05:5"]);
        assert_eq!(code(&out), 0, "{fig}");
        let (_, rows) = read_csv(&stdout(&out));
        assert_eq!(rows.len(), 5, "{fig}");
    }
    assert_eq!(code(&flockcert(&["critical", "--fig", "fig9"])), 2);
    assert_eq!(code(&flockcert(&["critical", "--fig", "fig1", "--grid", "0:1"])), 2);
}

#[test]
fn figures_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = flockcert(&["figures", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    for fig in ["fig1", "fig2", "fig3", "fig4"] {
        assert!(dir.path().join(format!("{fig}.csv")).exists());
    }
}

fn simulate(dir: &Path, name: &str, extra: &[&str]) -> (Output, String) {
    let path = dir.join(name);
    let out = flockcert(
        &[
            &["simulate", "--dist", "uniform:a=0,b=0.2", "--lambda", "1", "--beta", "0.5", "--tmax", "2"],
            extra,
            &["--out", path.to_str().unwrap()],
        ]
        .concat(),
    );
    let csv = fs::read_to_string(&path).unwrap_or_default();
    (out, csv)
}

#[test]
fn simulate_zero_dispersion_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (out, csv) = simulate(dir.path(), "z.csv", &["--N", "8", "--d", "2", "--seed", "7", "--vel-dispersion", "0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&csv);
    assert!(column(&header, &rows, "V").iter().all(|v| v.parse::<f64>().unwrap() == 0.0));

    let (_, a) = simulate(dir.path(), "a.csv", &["--seed", "11"]);
    let (_, b) = simulate(dir.path(), "b.csv", &["--seed", "11"]);
    assert!(!a.is_empty());
    assert_eq!(a, b);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    for key in ["V0", "D0", "L0", "fitted_decay_rate", "feasible", "omega", "violations_count"] {
        assert!(summary.get(key).is_some(), "{key}");
    }
}

#[test]
fn simulate_certified_run_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let (out, _) = simulate(dir.path(), "c.csv", &["--seed", "3", "--vel-dispersion", "0.02"]);
    assert_eq!(code(&out), 0);
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["feasible"], true);
    assert_eq!(summary["violations_count"], 0);
}

#[test]
fn simulate_blow_up_keeps_partial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("boom.csv");
    let out = flockcert(&[
        "simulate", "--dist", "dirac:tau=1", "--lambda", "20", "--beta", "0.0", "--tmax", "50", "--dt", "0.01",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_csv(&fs::read_to_string(&path).unwrap());
    assert!(!rows.is_empty());
}

fn sweep(extra: &[&str], jobs: &str) -> Output {
    flockcert(&[&["--jobs", jobs, "sweep"], &EXP[..], extra].concat())
}

#[test]
fn sweep_lambda_flips_once() {
    let out = sweep(&["--v0", "0.01", "--axis", "lambda:0.2:6:30"], "2");
    assert_eq!(code(&out), 0);
    let (header, rows) = read_csv(&stdout(&out));
    let feasible: Vec<bool> = column(&header, &rows, "feasible").iter().map(|s| s == "true").collect();
    let flips = feasible.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips, 1);
    assert!(feasible[0] && !feasible[feasible.len() - 1]);
    let values: Vec<f64> = column(&header, &rows, "value").iter().map(|s| s.parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn sweep_edge_cases() {
    let empty = sweep(&["--axis", "lambda:0.1:1:0"], "1");
    assert_eq!(code(&empty), 0);
    assert_eq!(stdout(&empty).lines().count(), 1);

    let dup = sweep(&["--v0", "0.1", "--axis", "mu=0.02,0.01,0.02"], "3");
    assert_eq!(code(&dup), 0);
    let (_, rows) = read_csv(&stdout(&dup));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1], rows[2]);
    assert!(rows[0][1].parse::<f64>().unwrap() < rows[1][1].parse::<f64>().unwrap());

    for bad in ["lambda", "lambda:0:1", "gamma:0:1:3", "tau:0:1:3", "mu=0:1:2", "lambda=x"] {
        assert_eq!(code(&sweep(&["--axis", bad], "1")), 2, "{bad}");
    }
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let args = ["--v0", "0.05", "--axis", "mu:0.001:0.12:40"];
    let one = sweep(&args, "1");
    let four = sweep(&args, "4");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);

    let sim = ["--axis", "v0=0.5,0.1", "--simulate", "--tmax", "3", "--N", "5"];
    let one = sweep(&sim, "1");
    let four = sweep(&sim, "4");
    assert_eq!(code(&one), 0, "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    let (header, rows) = read_csv(&stdout(&one));
    let v0: Vec<f64> = column(&header, &rows, "v0").iter().map(|s| s.parse().unwrap()).collect();
    assert!((v0[0] - 0.1).abs() < 1e-12 && (v0[1] - 0.5).abs() < 1e-12);
    assert!(column(&header, &rows, "fitted_decay_rate").iter().all(|s| s.parse::<f64>().unwrap() > 0.0));
}

#[test]
fn outputs_round_trip() {
    let out = flockcert(&["critical", "--fig", "fig2", "--grid", "0.01,0.1,0.33"]);
    for line in stdout(&out).lines().skip(1) {
        for field in line.split(',') {
            let v: f64 = field.parse().unwrap();
            if v.is_finite() {
                assert_eq!(format!("{v:.16e}"), field);
            }
        }
    }
    let ok = flockcert(&[&["check"], &EXP[..], &["--v0", "0.01"]].concat());
    let json: serde_json::Value = serde_json::from_str(&stdout(&ok)).unwrap();
    let again: serde_json::Value = serde_json::from_str(&serde_json::to_string(&json).unwrap()).unwrap();
    assert_eq!(json, again);
}
