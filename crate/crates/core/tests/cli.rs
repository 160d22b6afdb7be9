use std::fs;
use std::process::{Command, Output};

fn ggc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggc"))
        .args(args)
        .env_remove("GGC_REL_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn jk_all_forms_agree() {
    let o = ggc(&[
        "jk", "--a", "2", "--b", "2", "--k", "1", "--T-grid", "2:10:9", "--form", "all",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with('#'));
    let rows = rows(&text);
    assert_eq!(rows.len(), 9);
    for r in rows {
        assert!(r[9].parse::<f64>().unwrap() < 1e-6);
    }
}

#[test]
fn jk_closed_form_value() {
    let o = ggc(&[
        "jk", "--a", "2", "--b", "2", "--k", "1", "--T-grid", "2", "--form", "closed",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = rows(&stdout(&o))[0][6].parse().unwrap();
    // log(6.25 / 4) / 1.5
    assert!((v - 0.297_524_735_085_613).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        ggc(&["jk", "--a", "0.9", "--b", "2", "--k", "1", "--T-grid", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ggc(&["ggc-check", "--lt", "two-point", "--s-grid", ""])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ggc(&["jk", "--a", "2", "--b", "2", "--k", "1", "--t-grid", "1", "--T-grid", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ggc(&[
            "ggc-check",
            "--lt",
            "ggc:/no/such/file.json",
            "--s-grid",
            "1"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(ggc(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn malformed_json_spec_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"atoms": [[-1, 2]]}"#).unwrap();
    let spec = format!("ggc:{}", path.display());
    assert_eq!(
        ggc(&["ggc-check", "--lt", &spec, "--s-grid", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn ggc_check_verdicts() {
    let pass = ggc(&[
        "ggc-check",
        "--lt",
        "quotient:0.7/1,lognormal:0,1",
        "--s-grid",
        "0.5,1,2",
    ]);
    assert_eq!(pass.status.code(), Some(0), "{}", stdout(&pass));
    let report: serde_json::Value = serde_json::from_slice(&pass.stdout).unwrap();
    assert_eq!(report["passed"], true);

    let fail = ggc(&["ggc-check", "--lt", "two-point", "--s-grid", "1,2.5,3"]);
    assert_eq!(fail.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&fail.stdout).unwrap();
    assert!(report["first_violation"]["margin"].as_f64().unwrap() < 0.0);
}

#[test]
fn hm_and_cm_checks() {
    assert_eq!(
        ggc(&[
            "hm-check",
            "--density",
            "gamma:2,1",
            "--k",
            "5",
            "--u-grid",
            "0.5,1,2"
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(
        ggc(&[
            "hm-check",
            "--density",
            "bimodal_counterexample",
            "--k",
            "1",
            "--u-grid",
            "1,3,10,30"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        ggc(&["cm-check", "--function", "jk-eq3:2,2,1"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        ggc(&["cm-check", "--function", "ik:2;0.5:2.5,0.5:3"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        ggc(&["cm-check", "--function", "linear", "--max-order", "2"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn noisy_evaluations_are_inconclusive() {
    // with unit relative error per value every negative margin is within noise
    let o = ggc(&[
        "cm-check",
        "--function",
        "linear",
        "--max-order",
        "1",
        "--eval-rel-error",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn lt_of_exponential_atom() {
    let o = ggc(&["lt", "--ggc", "atoms:1,1", "--s-grid", "0,1,2"]);
    assert_eq!(o.status.code(), Some(0));
    let values: Vec<f64> = rows(&stdout(&o))
        .iter()
        .map(|r| r[1].parse().unwrap())
        .collect();
    for (v, exact) in values.iter().zip([1.0, 0.5, 1.0 / 3.0]) {
        assert!((v - exact).abs() < 1e-15);
    }
}

#[test]
fn sampling_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.json");
    fs::write(&y, r#"{"components":[{"shape":0.7,"rate":1.0}]}"#).unwrap();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let o = ggc(&[
            "sample",
            "--spec",
            y.to_str().unwrap(),
            "--density",
            "lognormal:0,1",
            "--op",
            "quotient",
            "--n",
            "100000",
            "--seed",
            "42",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(
        String::from_utf8_lossy(&outputs[0]).lines().count(),
        100_002
    );
}

#[test]
fn sample_empirical_transform_table() {
    let o = ggc(&[
        "sample",
        "--spec",
        "1/1",
        "--op",
        "gamma-sum",
        "--n",
        "1000",
        "--seed",
        "1",
        "--s-grid",
        "0,1",
    ]);
    let r = rows(&stdout(&o));
    assert_eq!(r[0][1], "1");
    assert_eq!(r[0][2], "0");
    assert_eq!(r[1][3], "1000");
}

#[test]
fn tolerance_flag_overrides_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_ggc"));
        c.args(["jk", "--a", "2", "--b", "2", "--k", "1", "--T-grid", "2"]);
        if let Some(e) = env {
            c.env("GGC_REL_TOL", e);
        } else {
            c.env_remove("GGC_REL_TOL");
        }
        if let Some(f) = flag {
            c.args(["--rel-tol", f]);
        }
        c.output().unwrap()
    };
    assert_eq!(run(Some("-1"), None).status.code(), Some(2));
    assert_eq!(run(Some("-1"), Some("1e-8")).status.code(), Some(0));
    assert_eq!(run(Some("not-a-number"), None).status.code(), Some(2));
}
