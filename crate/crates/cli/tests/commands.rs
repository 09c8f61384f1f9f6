use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dual-rtree"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn generate(dir: &Path, name: &str, n: &str, seed: &str) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let out = cli(&["generate", "--n", n, "--seed", seed, "--out", &path]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a.csv", "1000", "7");
    let b = generate(dir.path(), "b.csv", "1000", "7");
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn generate_zero_writes_header_only() {
    let out = cli(&["generate", "--n", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "id,apex_x,apex_y,direction_deg,angle_deg\n"
    );
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&cli(&["generate", "--angle-max", "200"])), 2);
    assert_eq!(code(&cli(&["generate", "--bogus"])), 2);
    assert_eq!(
        code(&cli(&["query", "--index", "dual-polar", "--data", "x.csv"])),
        2
    );
    assert_eq!(code(&cli(&["generate", "--region", "0,0,1"])), 2);
    assert_eq!(
        code(&cli(&["sweep", "--axis", "n", "--values", "1e3,abc"])),
        2
    );
}

#[test]
fn io_errors_exit_1() {
    let out = cli(&[
        "query",
        "--index",
        "linear",
        "--data",
        "/nonexistent/s.csv",
        "--point",
        "0,0",
    ]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "generate",
        "--n",
        "1",
        "--out",
        dir.path().join("no/such/dir.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn bad_row_exit_1_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(
        &path,
        "id,apex_x,apex_y,direction_deg,angle_deg\n0,1,2,30,5\n1,1,2,30,zero\n",
    )
    .unwrap();
    let out = cli(&[
        "query",
        "--index",
        "dual-polar",
        "--data",
        path.to_str().unwrap(),
        "--point",
        "0,0",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn all_methods_return_same_hits() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "s.csv", "3000", "11");
    for point in ["0,0", "-1200.5,800", "2500,-2500"] {
        let results: Vec<Value> = ["linear", "regular", "dual-polar", "dual-affine"]
            .iter()
            .map(|m| {
                let out = cli(&["query", "--index", m, "--data", &data, "--point", point]);
                assert_eq!(code(&out), 0);
                json(&out)
            })
            .collect();
        for r in &results[1..] {
            assert_eq!(r["hits"], results[0]["hits"], "point {point}");
            assert!(
                r["candidates"].as_u64().unwrap() >= r["hits"].as_array().unwrap().len() as u64
            );
        }
    }
}

#[test]
fn apex_and_constructed_line_find_their_sector() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "s.csv", "200", "5");
    let text = std::fs::read_to_string(&data).unwrap();
    let row: Vec<f64> = text
        .lines()
        .nth(43)
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    let (id, x, y, dir_deg) = (row[0] as u64, row[1], row[2], row[3]);
    for m in ["linear", "regular", "dual-polar", "dual-affine"] {
        let out = cli(&[
            "query",
            "--index",
            m,
            "--data",
            &data,
            "--point",
            &format!("{x},{y}"),
        ]);
        let hits = json(&out)["hits"].clone();
        assert!(
            hits.as_array().unwrap().contains(&Value::from(id)),
            "{m}: {hits}"
        );

        let dir = dir_deg.to_radians();
        let theta = dir + std::f64::consts::FRAC_PI_2;
        let rho = x * theta.cos() + y * theta.sin();
        let out = cli(&[
            "query",
            "--index",
            m,
            "--data",
            &data,
            "--line",
            &format!("{theta},{rho}"),
        ]);
        assert_eq!(code(&out), 0);
        let hits = json(&out)["hits"].clone();
        assert!(
            hits.as_array().unwrap().contains(&Value::from(id)),
            "{m} line: {hits}"
        );
    }
}

#[test]
fn verify_exit_codes() {
    let ok = cli(&["verify", "--n", "1000", "--queries", "1000", "--seed", "1"]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&ok)["discrepancies"], 0);
    assert_eq!(code(&cli(&["verify", "--n", "0"])), 0);
    let bad = cli(&["verify", "--n", "500", "--queries", "200", "--inject-fault"]);
    assert_eq!(code(&bad), 3);
    let report = json(&bad);
    assert!(report["counterexample"]["sector"].is_u64());
    assert!(report["counterexample"]["point"]["x"].is_f64());
}

#[test]
fn bench_writes_one_row_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bench.csv");
    let out = cli(&[
        "bench",
        "--n",
        "100000",
        "--methods",
        "linear,regular,dual-polar",
        "--queries",
        "20",
        "--repetitions",
        "1",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&out_path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "method");
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    let methods: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(methods, ["linear", "regular", "dual-polar"]);
    let cov = headers.iter().position(|h| h == "coverage_union").unwrap();
    assert_eq!(&rows[0][cov], "");
}

#[test]
fn bench_json_mirror() {
    let out = cli(&[
        "bench",
        "--n",
        "2000",
        "--queries",
        "10",
        "--repetitions",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let rows = json(&out);
    assert_eq!(rows.as_array().unwrap().len(), 4);
    assert!(rows[0]["coverage_sum"].is_null());
    assert!(rows[2]["coverage_sum"].is_f64());
}

#[test]
fn sweep_rows_per_value() {
    let out = cli(&[
        "sweep",
        "--axis",
        "n",
        "--values",
        "1e3,1e4",
        "--queries",
        "10",
        "--repetitions",
        "1",
        "--methods",
        "regular,dual-polar",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    assert_eq!(
        code(&cli(&["sweep", "--axis", "n", "--values", "1e4,1e3"])),
        2
    );
}

#[test]
fn stats_reports_both_variants() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "s.csv", "5000", "2");
    let stats = |m: &str| {
        let out = cli(&["stats", "--index", m, "--data", &data]);
        assert_eq!(code(&out), 0);
        json(&out)
    };
    let regular = stats("regular");
    let dual = stats("dual-polar");
    for s in [&regular, &dual] {
        assert!(s["trees"][0]["sum"]["mean_coverage"].is_f64());
        assert!(s["trees"][0]["union"]["mean_overlap"].is_f64());
    }
    let f = |v: &Value, k: &str| v["pooled"][k].as_f64().unwrap();
    // the dual tree wastes less: sum coverage nearer one, less overlap
    assert!((f(&dual, "coverage_sum") - 1.0).abs() < (f(&regular, "coverage_sum") - 1.0).abs());
    assert!(f(&dual, "overlap_union") < f(&regular, "overlap_union"));
    assert_eq!(stats("linear")["pooled"], Value::Null);
}

#[test]
fn logs_stay_off_stdout() {
    let out = Command::new(env!("CARGO_BIN_EXE_dual-rtree"))
        .args(["verify", "--n", "50", "--queries", "10"])
        .env("RUST_LOG", "info")
        .output()
        .unwrap();
    json(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("verify config"));
}
