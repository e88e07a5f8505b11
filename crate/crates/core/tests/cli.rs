use std::path::Path;
use std::process::{Command, Output};

use lpiso::{Interval, StepFn, SumFn, SumIsometry, XSpec};

fn lpiso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpiso"))
        .args(args)
        .output()
        .unwrap()
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn chi(lo: f64, hi: f64, c: f64) -> StepFn {
    StepFn::indicator(1, &[Interval::new(lo, hi).unwrap()], c).unwrap()
}

fn csv_rows(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect();
    (header, rows)
}

#[test]
fn verify_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = lpiso(&[
        "verify",
        "--suite",
        "homotopy-isometry",
        "--p",
        "1,2,3",
        "--trials",
        "30",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["suite"], "homotopy-isometry");
    assert_eq!(report["p"], serde_json::json!([1.0, 2.0, 3.0]));
    assert_eq!(report["trials"], 30);
    assert_eq!(report["failures"], serde_json::json!([]));
    assert!(report["max_error"].as_f64().unwrap() <= 1e-9);
    assert!(report["timestamp"].is_u64());
}

#[test]
fn verify_is_deterministic_without_timestamp() {
    let args = [
        "verify",
        "--suite",
        "all",
        "--trials",
        "3",
        "--seed",
        "42",
        "--no-timestamp",
    ];
    let a = lpiso(&args);
    let b = lpiso(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!String::from_utf8_lossy(&a.stdout).contains("timestamp"));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"suite":"fubini","p_list":[1.5],"d":2,"q":"inf","trials":4,"seed":9}"#,
    )
    .unwrap();
    let o = lpiso(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "2",
        "--no-timestamp",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["suite"], "fubini");
    assert_eq!(report["trials"], 2);
    assert_eq!(report["d"], 2);
    assert_eq!(report["q"], "inf");
}

#[test]
fn usage_errors_exit_two() {
    let o = lpiso(&["verify", "--suite", "nonexistent"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
    assert_eq!(lpiso(&["verify", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(lpiso(&["verify", "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(lpiso(&["verify", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        lpiso(&["verify", "--config", "/nonexistent/c.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(lpiso(&[]).status.code(), Some(2));
    assert_eq!(lpiso(&["--help"]).status.code(), Some(0));
}

#[test]
fn failing_property_exits_one() {
    // A tolerance no suite can meet.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"suite":"fact2","trials":3,"tolerances":{"fact2":1e-30}}"#,
    )
    .unwrap();
    let o = lpiso(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failures = report["failures"].as_array().unwrap();
    assert!(!failures.is_empty());
    let trials: Vec<u64> = failures
        .iter()
        .map(|f| f["trial"].as_u64().unwrap())
        .collect();
    assert!(trials.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn homotopy_trace_identity() {
    let dir = tempfile::tempdir().unwrap();
    let f = SumFn::new(vec![
        lpiso::Component {
            id: 0,
            xspec: XSpec::scalar(),
            f: chi(0.0, 0.4, 2.0),
        },
        lpiso::Component {
            id: 1,
            xspec: XSpec::scalar(),
            f: chi(0.3, 1.0, -1.0),
        },
    ])
    .unwrap();
    let iso = write_json(dir.path(), "t.json", &SumIsometry::identity());
    let vec = write_json(dir.path(), "f.json", &f);
    let o = lpiso(&[
        "homotopy-trace",
        "--isometry",
        &iso,
        "--vector",
        &vec,
        "--p",
        "1.5",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let (header, rows) = csv_rows(&o.stdout);
    assert_eq!(
        header,
        [
            "t",
            "norm_hF",
            "dist_to_h_t0",
            "dist_to_T_action",
            "dist_to_identity_action"
        ]
    );
    assert_eq!(rows.len(), 101);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[100][0].parse::<f64>().unwrap(), 1.0);
    let norm0: f64 = rows[0][1].parse().unwrap();
    for row in &rows {
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
        assert!((row[1].parse::<f64>().unwrap() - norm0).abs() <= 1e-9);
        // 17 significant digits
        assert_eq!(
            row[1]
                .split('e')
                .next()
                .unwrap()
                .replace(['.', '-'], "")
                .len(),
            17
        );
    }
}

#[test]
fn homotopy_trace_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let f = write_json(
        dir.path(),
        "f.json",
        &SumFn::single(chi(0.0, 1.0, 1.0), XSpec::scalar()).unwrap(),
    );
    let b = bad.to_str().unwrap();
    assert_eq!(
        lpiso(&[
            "homotopy-trace",
            "--isometry",
            b,
            "--vector",
            &f,
            "--p",
            "2"
        ])
        .status
        .code(),
        Some(2)
    );
    let swap = write_json(dir.path(), "s.json", &SumIsometry::swap(0, 1));
    assert_eq!(
        lpiso(&[
            "homotopy-trace",
            "--isometry",
            &swap,
            "--vector",
            &f,
            "--p",
            "2"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn orbit_path_cli() {
    let dir = tempfile::tempdir().unwrap();
    let p = 2.0_f64;
    let one = write_json(dir.path(), "one.json", &chi(0.0, 1.0, 1.0));
    let half = write_json(dir.path(), "half.json", &chi(0.0, 0.5, 2f64.powf(1.0 / p)));
    let o = lpiso(&["orbit-path", "--f", &one, "--g", &half, "--p", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("orbit mismatch"));

    let out = dir.path().join("path.csv");
    let o = lpiso(&[
        "orbit-path",
        "--f",
        &one,
        "--g",
        &one,
        "--p",
        "2",
        "--samples",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&std::fs::read(&out).unwrap());
    assert_eq!(header, ["t", "norm", "support_measure", "digest"]);
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r[1..] == rows[0][1..]));
    assert_eq!(rows[0][3].len(), 64);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "[]").unwrap();
    let o = lpiso(&[
        "orbit-path",
        "--f",
        bad.to_str().unwrap(),
        "--g",
        &one,
        "--p",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn linfty_demo_cli() {
    for seed in ["0", "1", "17"] {
        let o = lpiso(&["linfty-demo", "--seed", seed]);
        assert_eq!(o.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v["witness"]["distance"].as_f64().unwrap() >= 1.0);
        assert_eq!(o.stdout, lpiso(&["linfty-demo", "--seed", seed]).stdout);
    }
}
