use std::path::Path;
use std::process::{Command, Output};

use corf::formats::{CertificateFile, PolyhedronFile, Table};
use corf_core::polyhedron::builtin_pentagon;
use corf_core::separator::{build_certificate, SeparatorConfig};
use corf_core::tiling::tiles_in_ball;
use proptest::prelude::*;
use serde_json::Value;

fn corf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corf")).args(args).env_remove("CORF_TOL").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn thresholds_match_closed_forms() {
    let o = corf(&["thresholds"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["max_deviation"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["config"]["command"], "thresholds");
    assert_eq!(v["config"]["seed"], 42);
}

#[test]
fn volumes_are_reproducible_from_the_seed() {
    let args = ["volumes", "--dim", "3", "--b", "1", "--ell", "1", "--samples", "20000", "--seed", "9"];
    let (a, b) = (corf(&args), corf(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["config"]["seed"], 9);
    assert!(v["z_score"].as_f64().unwrap().abs() < 5.0);
    let other = corf(&["volumes", "--dim", "3", "--b", "1", "--ell", "1", "--samples", "20000", "--seed", "10"]);
    assert_ne!(json(&other)["estimate"], v["estimate"]);
}

#[test]
fn separate_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let o = corf(&["separate", "--word", "1 3", "--out", path(&cert)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = corf(&["verify", "--certificate", path(&cert)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["passed"], true);

    let mut file = CertificateFile::read(&cert).unwrap();
    assert_eq!(file.config.as_ref().unwrap()["word"], serde_json::json!([1, 3]));
    file.index += 1;
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, file.to_json()).unwrap();
    let o = corf(&["verify", "--certificate", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["passed"], false);
}

#[test]
fn verify_against_the_wrong_polyhedron_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    assert_eq!(corf(&["separate", "--word", "0 2", "--out", path(&cert)]).status.code(), Some(0));
    let o = corf(&["verify", "--polyhedron", "dodecahedron", "--certificate", path(&cert)]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn bad_words_are_input_errors() {
    for w in ["1", "0 1", "x", "0 9"] {
        assert_eq!(corf(&["separate", "--word", w]).status.code(), Some(2), "word {w:?}");
    }
}

#[test]
fn strict_mode_rejects_axes_in_walls() {
    // the axis of 1 3 lies in the wall of face 2
    let o = corf(&["separate", "--word", "1 3", "--strict-axis"]);
    assert_eq!(o.status.code(), Some(5));
    assert_eq!(corf(&["separate", "--word", "0 2 1 3", "--strict-axis"]).status.code(), Some(0));
}

#[test]
fn example62_traces() {
    let o = corf(&["growth", "example62"]);
    assert_eq!(o.status.code(), Some(0));
    let t = Table::from_csv(&stdout(&o)).unwrap();
    assert_eq!(t.rows.len(), 10);
    assert!(t.comments[0].starts_with("config="));
    for (n, tr) in t.column("n").unwrap().iter().zip(t.column("trace").unwrap()) {
        let n: i64 = n.parse().unwrap();
        assert_eq!(tr.parse::<i64>().unwrap(), 2 + 4 * n);
    }
}

#[test]
fn bruteforce_small_words() {
    let o = corf(&["growth", "bruteforce", "--max-len", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let t = Table::from_csv(&stdout(&o)).unwrap();
    let words = t.column("word").unwrap();
    let d = t.column("D_or_bound").unwrap();
    let at = |w: &str| d[words.iter().position(|x| *x == w).unwrap()];
    assert_eq!(at("a"), "2");
    assert_eq!(at("aa"), "3");
    assert_eq!(at("B"), "2");
    assert_eq!(words.len(), 4 + 12 + 36);
}

#[test]
fn cover_transfer_holds() {
    let o = corf(&["growth", "cover-transfer"]);
    assert_eq!(o.status.code(), Some(0));
    let t = Table::from_csv(&stdout(&o)).unwrap();
    assert!(t.comments.iter().any(|c| c == "inequality holds at all n"));
    assert!(t.column("holds").unwrap().iter().all(|h| *h == "true"));
}

#[test]
fn svarc_milnor_probe_runs() {
    let o = corf(&["growth", "svarc-milnor", "--samples", "50", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let t = Table::from_csv(&stdout(&o)).unwrap();
    assert_eq!(t.rows.len(), 50);
    assert!(t.comments[0].contains("\"seed\":3"));
}

#[test]
fn certificate_curve_stays_under_the_line() {
    let o = corf(&["growth", "certificate-curve", "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let t = Table::from_csv(&stdout(&o)).unwrap();
    for (d, line) in t.column("D_or_bound").unwrap().iter().zip(t.column("bound_line").unwrap()) {
        let d: f64 = d.trim_start_matches("<=").parse().unwrap();
        assert!(d <= line.parse::<f64>().unwrap());
    }
}

#[test]
fn tiling_export_counts() {
    let o = corf(&["tiling-export", "--radius", "0"]);
    assert_eq!(json(&o)["count"], 1);
    let o = corf(&["tiling-export", "--radius", "1.5"]);
    let p = builtin_pentagon();
    let direct = tiles_in_ball(&p, p.reference(), 1.5, 200_000).unwrap();
    assert_eq!(json(&o)["count"], direct.len());
    assert_eq!(json(&o)["config"]["radius"], 1.5);
    assert_eq!(corf(&["tiling-export", "--radius", "-1"]).status.code(), Some(2));
    assert_eq!(corf(&["tiling-export", "--radius", "4", "--frontier-bound", "10"]).status.code(), Some(4));
}

#[test]
fn polyhedron_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = corf(&["polyhedron", "--polyhedron", "dodecahedron"]);
    assert_eq!(o.status.code(), Some(0));
    let mut v = json(&o);
    let derived = v["derived"].clone();
    assert!(derived["max_angle_deviation"].as_f64().unwrap() < 1e-9);
    v.as_object_mut().unwrap().retain(|k, _| k != "derived" && k != "config");
    let file: PolyhedronFile = serde_json::from_value(v).unwrap();
    let good = dir.path().join("d.json");
    std::fs::write(&good, serde_json::to_string(&file).unwrap()).unwrap();
    assert_eq!(corf(&["separate", "--polyhedron", path(&good), "--word", "0 3"]).status.code(), Some(0));
    assert_eq!(file.build().unwrap().face_count(), 12);

    let mut bent = file.clone();
    bent.normals[3][2] += 1e-3;
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&bent).unwrap()).unwrap();
    assert_eq!(corf(&["polyhedron", "--polyhedron", path(&bad)]).status.code(), Some(2));
    assert_eq!(corf(&["polyhedron", "--polyhedron", "/no/such/file"]).status.code(), Some(2));
}

#[test]
fn tolerance_from_the_environment() {
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_corf"))
            .arg("thresholds")
            .env("CORF_TOL", tol)
            .output()
            .unwrap()
    };
    assert_eq!(run("abc").status.code(), Some(2));
    assert_eq!(run("0.5").status.code(), Some(2));
    let o = run("1e-8");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["config"]["tol"], 1e-8);
}

#[test]
fn usage_errors() {
    assert_eq!(corf(&[]).status.code(), Some(2));
    assert_eq!(corf(&["growth", "nope"]).status.code(), Some(2));
    assert_eq!(corf(&["--help"]).status.code(), Some(0));
}

#[test]
fn csv_round_trip() {
    let mut t = Table::new(&["a", "b"]);
    t.comment("x=1");
    t.push(vec!["1".into(), "has,comma".into()]);
    t.push(vec!["".into(), "q\"uote".into()]);
    assert_eq!(Table::from_csv(&t.to_csv()).unwrap(), t);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certificate_json_is_lossless(
        mid in proptest::collection::vec(-1e3f64..1e3, 3),
        residual in 0.0f64..1e6,
        bound in 1e-3f64..1e9,
    ) {
        let c = build_certificate(&builtin_pentagon(), &[0, 2], &SeparatorConfig::default()).unwrap();
        let mut file = CertificateFile::new(&c, None);
        file.midpoint = mid;
        file.fold_witness.residual = residual;
        file.length_bound = bound;
        let back = CertificateFile::from_json(&file.to_json()).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.certificate().unwrap().midpoint, file.midpoint.clone());
    }
}
