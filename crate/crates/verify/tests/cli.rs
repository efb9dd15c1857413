use std::path::{Path, PathBuf};
use std::process::Command;

use geodesic_verify::{RunReport, Scenario};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn verify(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(args)
        .output()
        .expect("spawn verify");
    (
        out.status.code().expect("exit code"),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run_to(scenario: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    verify(&args).0
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL_SPHERE: &str = r#"{
    "epsilon": 1, "n": 2,
    "surface": {"kind": "geodesic_sphere", "radius": 0.7853981633974483},
    "grid": {"u": [3, 3], "theta": [2]},
    "checks": [{"name": "hopf_J"}, {"name": "lemma_roundtrip"}]
}"#;

#[test]
fn json_is_deterministic_and_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenarios().join("sphere_s3.json");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run_to(&s, &a, &[]), 0);
    assert_eq!(run_to(&s, &b, &[]), 0);
    let ja = std::fs::read(a.join("sphere_s3.json")).unwrap();
    let jb = std::fs::read(b.join("sphere_s3.json")).unwrap();
    assert_eq!(ja, jb);

    let report: RunReport = serde_json::from_slice(&ja).unwrap();
    assert_eq!(report.exit_code, 0);
    assert_eq!(report.provenance.fd_step, 1e-4);
    assert_eq!(report.provenance.seed, 7);
    assert!(!report.provenance.tangent_form.is_empty());
    // parse → emit reproduces the file byte for byte
    let again = geodesic_verify::to_json(&report).unwrap();
    if let Some(i) = (0..ja.len().min(again.len())).find(|&i| ja[i] != again[i]) {
        let ctx = |b: &[u8]| {
            String::from_utf8_lossy(&b[i.saturating_sub(80)..(i + 40).min(b.len())]).into_owned()
        };
        panic!("differs at byte {i}:\n{}\n---\n{}", ctx(&ja), ctx(&again));
    }
    assert_eq!(again.len(), ja.len());
}

#[test]
fn csv_has_one_row_per_check_and_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let s = write_scenario(tmp.path(), "small.json", SMALL_SPHERE);
    assert_eq!(run_to(&s, tmp.path(), &["--format", "csv"]), 0);
    let mut r = csv::Reader::from_path(tmp.path().join("small.csv")).unwrap();
    let headers = r.headers().unwrap().clone();
    assert_eq!(&headers[0], "check");
    assert_eq!(&headers[8], "verdict");
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 3 * 3 * 2);
    assert!(rows
        .iter()
        .take(18)
        .all(|row| &row[0] == "hopf_J" && &row[8] == "HOPF"));
    assert!(rows
        .iter()
        .skip(18)
        .all(|row| &row[0] == "lemma_roundtrip" && &row[8] == "PASS"));
}

#[test]
fn seed_flag_overrides_scenario_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let s = write_scenario(tmp.path(), "small.json", SMALL_SPHERE);
    assert_eq!(run_to(&s, &tmp.path().join("x"), &["--seed", "42"]), 0);
    let report: RunReport =
        serde_json::from_slice(&std::fs::read(tmp.path().join("x/small.json")).unwrap()).unwrap();
    assert_eq!(report.provenance.seed, 42);
}

#[test]
fn violated_expectation_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SMALL_SPHERE.replace(
        r#"{"name": "hopf_J"}"#,
        r#"{"name": "hopf_J", "expect": "not_hopf"}"#,
    );
    let s = write_scenario(tmp.path(), "wrong.json", &body);
    assert_eq!(run_to(&s, tmp.path(), &[]), 1);
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = SMALL_SPHERE.replace("\"n\": 2", "\"n\": 2, \"verbose\": true");
    let s = write_scenario(tmp.path(), "unknown.json", &unknown);
    let (code, err) = verify(&["--scenario", s.to_str().unwrap(), "--out", "/tmp"]);
    assert_eq!(code, 2);
    assert!(err.contains("verbose"), "{err}");

    let missing = tmp.path().join("nope.json");
    assert_eq!(run_to(&missing, tmp.path(), &[]), 2);
    let s = write_scenario(tmp.path(), "ok.json", SMALL_SPHERE);
    assert_eq!(run_to(&s, tmp.path(), &["--format", "xml"]), 2);
    assert_eq!(verify(&["--out", "/tmp"]).0, 2);

    // parameters the catalog rejects
    let bad = SMALL_SPHERE.replace("0.7853981633974483", "4.0");
    let s = write_scenario(tmp.path(), "bad.json", &bad);
    assert_eq!(run_to(&s, tmp.path(), &[]), 2);
}

#[test]
fn declared_convexity_premise_aborts_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SMALL_SPHERE
        .replace("0.7853981633974483", "1.5707963267948966")
        .replace("\"checks\"", "\"require_convex\": true, \"checks\"");
    let s = write_scenario(tmp.path(), "great.json", &body);
    assert_eq!(run_to(&s, tmp.path(), &[]), 3);
    let report: RunReport =
        serde_json::from_slice(&std::fs::read(tmp.path().join("great.json")).unwrap()).unwrap();
    assert!(!report.convexity.convex);
    assert!(report.checks.iter().all(|c| c.samples.is_empty()));
}

#[test]
fn bundled_scenarios_parse() {
    let mut count = 0;
    for entry in std::fs::read_dir(scenarios()).unwrap() {
        let p = entry.unwrap().path();
        Scenario::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        count += 1;
    }
    assert!(count >= 3);
}
