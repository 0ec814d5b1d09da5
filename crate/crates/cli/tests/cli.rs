use std::process::{Command, Output};

fn papdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_papdiff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn forward_relu_at_zero() {
    let out = papdiff(&["grad", "--mode", "forward", "-e", "relu(x1)", "-v", "0", "-w", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0\n");
}

#[test]
fn eval_product() {
    let out = papdiff(&["eval", "-e", "mult(x1,x2)", "-v", "3,2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "6\n");
}

#[test]
fn every_mode_prints_the_same_row() {
    let args = ["-e", "if (x1 > 0) mult(x1, x2) else neg(x2)", "-v", "1.5,-2"];
    let sym = papdiff(&[&["grad", "--mode", "symbolic"][..], &args].concat());
    let fwd = papdiff(&[&["grad", "--mode", "forward"][..], &args].concat());
    let rev = papdiff(&[&["grad", "--mode", "reverse"][..], &args].concat());
    assert_eq!(stdout(&sym), "-2,1.5\n");
    assert_eq!(stdout(&sym), stdout(&fwd));
    assert_eq!(stdout(&sym), stdout(&rev));
}

#[test]
fn gradcheck_reports_json_and_exits_zero() {
    let out = papdiff(&[
        "gradcheck",
        "-e",
        "relu(x1)",
        "--lo",
        "-1",
        "--hi",
        "1",
        "--samples",
        "1000",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["samples"], 1000);
    assert!(v["agreement_fraction"].as_f64().unwrap() >= 0.99);
}

#[test]
fn gradcheck_below_threshold_exits_one() {
    let out = papdiff(&[
        "gradcheck",
        "-e",
        "if (x1 > 0) 1 else 0",
        "--lo",
        "0",
        "--hi",
        "0",
        "--samples",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["gradcheck", "-e", "abs(sub(x1, x2))", "--samples", "500", "--seed", "7"];
    assert_eq!(papdiff(&args).stdout, papdiff(&args).stdout);
    let args = ["corpus", "--count", "20", "--seed", "3"];
    assert_eq!(papdiff(&args).stdout, papdiff(&args).stdout);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["eval", "-e", "relu(x1"],
        &["eval", "-e", "nosuch(x1)", "-v", "1"],
        &["eval", "-e", "x2", "-n", "1", "-v", "1"],
        &["eval", "-e", "x1", "-v", "one"],
        &["grad", "--mode", "sideways", "-e", "x1", "-v", "1"],
    ] {
        assert_eq!(papdiff(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn domain_errors_exit_one() {
    let out = papdiff(&["eval", "-e", "log(x1)", "-v", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("log"));
}

#[test]
fn repr_table_and_json() {
    let out = papdiff(&["repr", "-e", "relu(x1)"]);
    let text = stdout(&out);
    assert!(text.contains("x1 > 0"), "{text}");
    assert!(text.contains("x1 <= 0"), "{text}");
    let out = papdiff(&["repr", "-e", "relu(x1)", "--derivative", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pieces"][0]["component"][0], "1");
    assert_eq!(v["pieces"][1]["component"][0], "0");
}

#[test]
fn cantor_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cantor.csv");
    let out = papdiff(&[
        "cantor",
        "--lambda",
        "0.5",
        "--depth",
        "10",
        "--samples",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,phi_lambda,f,g,g_of_f");
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 5));
}

#[test]
fn probes_emit_csv() {
    let out = papdiff(&["probe", "claim1", "--count", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("x,x1,x2,q1,q2,k,d_k\n"));
    for line in text.lines().skip(1) {
        let q1: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(q1, 0.0);
    }
    let out = papdiff(&["probe", "claim3", "--count", "4", "--depth", "9"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 5);
}

#[test]
fn primitives_listing() {
    let out = papdiff(&["primitives"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["name"].as_str().unwrap())
        .collect();
    for name in ["relu", "sqrt", "reciprocal_no_nan", "div", "log"] {
        assert!(names.contains(&name), "{name}");
    }
}
