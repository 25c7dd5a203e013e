use std::process::{Command, Output};

fn finsler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eval_euclidean() {
    let o = finsler(&["eval", "--metric", "euclidean", "--x", "0,0", "--y", "3,4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "5.0");
}

#[test]
fn eval_json_has_value() {
    let o = finsler(&["eval", "--metric", "randers_flat", "--x", "0,0", "--y", "1,0", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.to_string().contains("1.5"), "{v}");
}

#[test]
fn distance_on_poincare_disk() {
    let o = finsler(&["distance", "--metric", "poincare", "--from", "0,0", "--to", "0.5,0"]);
    assert!(o.status.success());
    let d: f64 = stdout(&o).trim().parse().unwrap();
    assert!((d - 3f64.ln()).abs() <= 1e-6);
}

#[test]
fn negative_coordinates_are_accepted() {
    let o = finsler(&["distance", "--metric", "euclidean", "--from", "-1,-1", "--to", "2,3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d: f64 = stdout(&o).trim().parse().unwrap();
    assert!((d - 5.0).abs() <= 1e-9);
}

#[test]
fn exit_codes() {
    assert_eq!(finsler(&["eval", "--metric", "euclidean", "--x", "0", "--y", "3,4"]).status.code(), Some(1));
    assert_eq!(finsler(&["eval", "--metric", "no_such_metric", "--x", "0,0", "--y", "3,4"]).status.code(), Some(1));
    assert_eq!(finsler(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(finsler(&["--help"]).status.code(), Some(0));
    let far = finsler(&["exp", "--metric", "poincare", "--x", "0.99,0", "--v", "100,0"]);
    assert_eq!(far.status.code(), Some(2));
    assert!(!far.stderr.is_empty());
}

#[test]
fn verify_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("quartic.json");
    std::fs::write(&path, finsler_core::zoo::nonconvex_quartic_spec().to_json()).unwrap();
    let o = finsler(&["verify", "--metric-set", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("suite fail"));
}

#[test]
fn trace_csv_format() {
    let o = finsler(&["trace", "--metric", "euclidean", "--x", "0,0", "--y", "1,0", "--t-end", "0.002", "--step", "0.001"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x1,x2,v1,v2,F");
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 6);
        for f in fields {
            assert!(f.contains('e'), "{f}");
            f.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn trace_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let o = finsler(&["trace", "--metric", "sphere", "--x", "0,0", "--y", "1,0", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,x1,x2,v1,v2,F\n"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["connect", "--metric", "sphere", "--from", "0.1,0.2", "--to", "-0.3,0.4", "--json"];
    let a = finsler(&args);
    let b = finsler(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn convexity_prints_json_report() {
    let o = finsler(&["convexity", "--metric", "euclidean", "--at", "0,0", "--grid", "0.5:1.0:0.5", "--samples", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["epsilon"].as_f64(), Some(1.0));
    assert_eq!(v["eta"].as_f64(), Some(3.0));
}

#[test]
fn metric_sources_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("randers.json");
    let spec = finsler_core::zoo::randers_flat_spec().to_json();
    std::fs::write(&path, &spec).unwrap();
    let by_name = finsler(&["eval", "--metric", "randers_flat", "--x", "0,0", "--y", "1,2"]);
    let by_file = finsler(&["eval", "--metric", path.to_str().unwrap(), "--x", "0,0", "--y", "1,2"]);
    let inline = finsler(&["eval", "--metric", &spec, "--x", "0,0", "--y", "1,2"]);
    assert!(by_name.status.success());
    assert_eq!(by_name.stdout, by_file.stdout);
    assert_eq!(by_name.stdout, inline.stdout);
}

#[test]
fn tensor_and_connection_json() {
    let t = finsler(&["tensor", "--metric", "poincare", "--x", "0,0", "--y", "1,0", "--json"]);
    assert!(t.status.success());
    serde_json::from_str::<serde_json::Value>(&stdout(&t)).unwrap();
    let c = finsler(&["connection", "--metric", "poincare", "--x", "0.1,0", "--y", "1,0", "--json"]);
    assert!(c.status.success());
    serde_json::from_str::<serde_json::Value>(&stdout(&c)).unwrap();
}
