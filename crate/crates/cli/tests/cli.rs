use std::path::Path;
use std::process::{Command, Output};

fn kappa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kappa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn transform_writes_versioned_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = kappa(&[
        "transform",
        "--domain",
        "ellipsoid(2,1)",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(v["tool"], "kappa");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    let eig: Vec<f64> = serde_json::from_value(v["result"]["eigenvalues"].clone()).unwrap();
    assert!(
        (eig[0] - 5.0 / 6.0).abs() < 1e-4 && (eig[1] - 8.0 / 9.0).abs() < 1e-4,
        "{eig:?}"
    );
}

#[test]
fn verify_is_byte_identical_and_reports_failures() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["verify", "--only", "basic-1,basic-2,covering", "--seed", "7"];
    let oa = kappa(&[&args[..], &["--out", a.to_str().unwrap()]].concat());
    let ob = kappa(&[&args[..], &["--out", b.to_str().unwrap()]].concat());
    assert_eq!(code(&oa), 0, "{}", String::from_utf8_lossy(&oa.stdout));
    assert_eq!(oa.stdout, ob.stdout);
    assert_eq!(read(&a), read(&b));
    assert!(String::from_utf8_lossy(&oa.stdout).contains("3/3 claims passed"));

    let broken = kappa(&["verify", "--only", "basic-1", "--inject-fault", "broken-dualization"]);
    assert_eq!(code(&broken), 1);
    assert!(String::from_utf8_lossy(&broken.stdout).contains("basic-1                    FAIL"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&kappa(&["transform", "--domain", "torus"])), 2);
    assert_eq!(code(&kappa(&["transform", "--domain", "ball", "--point", "2,0"])), 2);
    assert_eq!(
        code(&kappa(&[
            "transform",
            "--domain",
            "ball",
            "--n",
            "3",
            "--quadrature",
            "sphere-product"
        ])),
        2
    );
    assert_eq!(code(&kappa(&["verify", "--only", "no-such-claim"])), 2);
    assert_eq!(code(&kappa(&["curvature", "--domain", "ball", "--n", "3"])), 2);
    assert_eq!(code(&kappa(&["bogus"])), 2);
    let o = kappa(&["transform", "--domain", "ball", "--point", "0.99999999999999,0"]);
    assert_eq!(code(&o), 3);
    let o = kappa(&["transform", "--domain", "ball", "--point", "0.9999999999999999,0"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("divergent"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"domain": {"kind": "polydisc", "n": 2}, "seed": 3, "point": "0.5,0"}"#,
    )
    .unwrap();
    let from_file = dir.path().join("f.json");
    let o = kappa(&[
        "transform",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        from_file.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&read(&from_file)).unwrap();
    assert_eq!(v["config"]["domain"]["kind"], "polydisc");
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["config"]["point"][0][0], 0.5);

    let flagged = dir.path().join("g.json");
    let o = kappa(&[
        "transform",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "4",
        "--out",
        flagged.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let w: serde_json::Value = serde_json::from_str(&read(&flagged)).unwrap();
    assert_eq!(w["config"]["seed"], 4);
    assert_ne!(v["config_hash"], w["config_hash"]);

    std::fs::write(&cfg, r#"{"sede": 3}"#).unwrap();
    assert_eq!(code(&kappa(&["transform", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn sweep_csv_has_units_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = kappa(&[
            "compare-wu",
            "--domain",
            "polydisc",
            "--grid",
            "radial:2x2",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = read(&a);
    assert_eq!(text, read(&b));
    assert!(text.starts_with("# tool: kappa "));
    assert!(text.contains("# config_hash: "));
    assert!(text.contains("# units:"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].starts_with("index,status,z1_re"));
    assert_eq!(rows.len(), 1 + 4);
    assert!(rows[1..].iter().all(|r| r.split(',').nth(1) == Some("ok")));
}

#[test]
fn curvature_reports_each_direction() {
    let o = kappa(&["curvature", "--domain", "ellipsoid", "--p", "2,1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["result"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["curvature"].is_null());
    assert!((rows[1]["curvature"].as_f64().unwrap() + 4.8).abs() < 1e-3);
}
