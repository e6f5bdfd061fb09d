use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const N3: &str = r#"{"family":"cap_conv","d":3,"s":0.7853981633974483}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zonalhop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn last_value(csv: &str) -> f64 {
    let line = csv.lines().last().unwrap();
    line.split(',').nth(2).unwrap().parse().unwrap()
}

#[test]
fn eval_cap_kernel_ends_at_one() {
    let o = run(&["eval", "--kernel", N3, "--points", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("x,theta,value\n"));
    assert_eq!(text.lines().count(), 6);
    assert!((last_value(&text) - 1.0).abs() < 1e-15);
}

#[test]
fn eval_truncated_power_vanishes_at_antipode() {
    let o = run(&[
        "eval",
        "--kernel",
        r#"{"family":"truncated_power","m":2,"t":1.5707963267948966}"#,
        "--grid",
        "theta",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text
        .lines()
        .find(|l| l.starts_with("-1"))
        .expect("row at x = -1");
    let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(v, 0.0);
}

#[test]
fn empty_grid_is_header_only() {
    let o = run(&["eval", "--kernel", N3, "--points", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x,theta,value\n");
}

#[test]
fn bad_descriptor_is_input_error() {
    let o = run(&["eval", "--kernel", r#"{"family":"cap_conv","d":4,"s":0.5}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(
        run(&["eval", "--kernel", "not json"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn coeffs_of_a_single_polynomial() {
    let o = run(&[
        "coeffs",
        "--lambda",
        "1",
        "--trunc",
        "5",
        "--kernel",
        r#"{"family":"series","coeffs":[0,0,0,1]}"#,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<(usize, f64)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('n'))
        .map(|l| {
            let mut it = l.split(',');
            (
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(rows.len(), 6);
    for (n, v) in rows {
        if n == 3 {
            assert!(v > 0.1);
        } else {
            assert!(v.abs() < 1e-12, "row {n} = {v}");
        }
    }
}

#[test]
fn coeffs_of_f2_are_positive() {
    let o = run(&[
        "coeffs",
        "--lambda",
        "1",
        "--trunc",
        "40",
        "--quad-order",
        "96",
        "--kernel",
        r#"{"family":"truncated_power","m":2,"t":1.5707963267948966}"#,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let values: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('n'))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 41);
    assert!(values.iter().all(|&v| v > 0.0));
    let single = run(&["coeffs", "--lambda", "1", "--trunc", "0", "--kernel", N3]);
    assert_eq!(
        stdout(&single)
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with('n'))
            .count(),
        1
    );
}

#[test]
fn verify_exit_codes_and_selection() {
    let all = run(&["verify"]);
    assert_eq!(all.status.code(), Some(0), "{}", stdout(&all));
    let tight = run(&["verify", "--tol", "1e-16"]);
    assert_eq!(tight.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&tight.stdout).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| !c["passed"].as_bool().unwrap())
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(!failed.is_empty());

    let one = run(&["verify", "--check", "hop_constant"]);
    assert_eq!(one.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0]["name"], "hop_constant");
    assert_eq!(run(&["verify", "--check", "bogus"]).status.code(), Some(2));
}

#[test]
fn interp_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let centers = write(dir.path(), "c.csv", "x,y,z,value\n0,0,1,1\n");
    let out = dir.path().join("itp.json");
    let o = run(&[
        "interp",
        "--kernel",
        N3,
        "--centers",
        &centers,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let itp: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(itp["coefficients"], serde_json::json!([1.0]));
}

#[test]
fn interp_fibonacci_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let pts = run(&["gen-points", "--n", "50"]);
    let mut body = String::from("x,y,z,value\n");
    for line in stdout(&pts).lines().skip(1) {
        let c: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        body.push_str(&format!("{line},{:e}\n", c[0] * c[1] + c[2]));
    }
    let centers = write(dir.path(), "c.csv", &body);
    let res = dir.path().join("res.csv");
    let out = dir.path().join("itp.json");
    let o = run(&[
        "interp",
        "--kernel",
        r#"{"family":"cap_conv","d":5,"s":0.7853981633974483}"#,
        "--centers",
        &centers,
        "--residuals",
        res.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(res).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("index,value,interpolant,residual")
    );
    for line in text.lines().skip(1) {
        let r: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(r <= 1e-9);
    }
}

#[test]
fn interp_duplicate_point_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let centers = write(dir.path(), "c.csv", "0,0,1,1\n1,0,0,2\n0,0,1,3\n");
    let o = run(&["interp", "--kernel", N3, "--centers", &centers]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn interp_singular_gram_is_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    let centers = write(dir.path(), "c.csv", "0,0,1,1\n1,0,0,2\n");
    let o = run(&[
        "interp",
        "--lambda",
        "0.5",
        "--kernel",
        r#"{"family":"series","coeffs":[1.0]}"#,
        "--centers",
        &centers,
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr)
        .contains("kernel not positive definite on this point set"));
}

#[test]
fn interp_lonlat_and_eval_table() {
    let dir = tempfile::tempdir().unwrap();
    let centers = write(
        dir.path(),
        "c.csv",
        "lon,lat,value\n0,0,1\n90,0,2\n0,90,3\n180,0,4\n",
    );
    let probes = write(dir.path(), "p.csv", "lon,lat\n0,0\n45,10\n");
    let table = dir.path().join("t.csv");
    let o = run(&[
        "interp",
        "--lonlat",
        "--kernel",
        N3,
        "--centers",
        &centers,
        "--eval",
        &probes,
        "--table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(table).unwrap();
    assert_eq!(text.lines().next(), Some("x0,x1,x2,value"));
    let first: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!((first - 1.0).abs() < 1e-9);
}

#[test]
fn outputs_are_deterministic() {
    let cases: [&[&str]; 5] = [
        &[
            "gen-points",
            "--n",
            "20",
            "--scheme",
            "random-seeded",
            "--seed",
            "42",
        ],
        &["eval", "--kernel", N3, "--points", "33"],
        &["coeffs", "--kernel", N3, "--trunc", "25"],
        &["conv", "--cap", "0.5", "--lambda", "2", "--points", "9"],
        &["caps", "--d", "7", "--s", "0.6"],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert_eq!(
            a.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&a.stderr)
        );
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let s1 = run(&[
        "gen-points",
        "--n",
        "5",
        "--scheme",
        "random-seeded",
        "--seed",
        "1",
    ]);
    let s2 = run(&[
        "gen-points",
        "--n",
        "5",
        "--scheme",
        "random-seeded",
        "--seed",
        "2",
    ]);
    assert_ne!(s1.stdout, s2.stdout);
}

#[test]
fn conv_flags_kinks() {
    let o = run(&["conv", "--cap", "0.5", "--lambda", "1", "--points", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("x,value,at_kink\n"));
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    let a = 0.5 * std::f64::consts::FRAC_PI_3 - 0.25 * (2.0 * std::f64::consts::FRAC_PI_3).sin();
    assert!((last[1].parse::<f64>().unwrap() - a).abs() < 1e-8);
}

#[test]
fn unsupported_hop_index_is_input_error() {
    let o = run(&["conv", "--cap", "0.5", "--lambda", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}
