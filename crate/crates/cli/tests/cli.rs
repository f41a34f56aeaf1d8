use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contact-lab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(dir.join("report.json")).unwrap()).unwrap()
}

const RENEWAL: &str = r#"
name = "renewal-small"
seed = 5
replicas = 1000

[experiment]
kind = "renewal"
lambda = 2.0
step = 1.0
n_max = 8
t_back = 10.0
"#;

#[test]
fn unknown_preset_lists_names() {
    let out = lab(&["preset", "no-such-preset"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("thm1.4-halfline") && err.contains("lemma3.1-renewal"), "{err}");
}

#[test]
fn invalid_config_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.toml", &RENEWAL.replace("lambda = 2.0", "lambda = -1.0"));
    assert_eq!(lab(&["run", &bad]).status.code(), Some(1));
    let unknown = write(tmp.path(), "unknown.toml", &format!("{RENEWAL}colour = 3\n"));
    assert_eq!(lab(&["run", &unknown]).status.code(), Some(1));
}

#[test]
fn oracle_prints_exact_law() {
    let out = lab(&["oracle", "path:2", "1", "0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert!((rows.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // symmetric endpoints
    assert!((rows[1] - rows[2]).abs() < 1e-14);
}

#[test]
fn oracle_check_passes_on_a_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "oracle.toml",
        r#"
seed = 11
replicas = 20000

[experiment]
kind = "oracle-check"
topology = { kind = "half-line", len = 3 }
lambdas = [1.5]
times = [1.0]
"#,
    );
    let dir = tmp.path().join("out");
    let out = lab(&["run", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&dir)["verdict"], "pass");
}

#[test]
fn pure_death_density_is_exponential() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "upper.toml",
        r#"
seed = 3
replicas = 2000

[experiment]
kind = "upper-sample"
lambda = 0.0
t_back = 1.0

[experiment.topology]
kind = "lattice"
radii = [5]
"#,
    );
    let dir = tmp.path().join("out");
    assert!(lab(&["run", &cfg, "--out", dir.to_str().unwrap()]).status.success());
    let d = &report(&dir)["data"]["density_end"];
    let (v, se) = (d["value"].as_f64().unwrap(), d["std_err"].as_f64().unwrap());
    assert!((v - (-1f64).exp()).abs() < 4.0 * se, "{v} +- {se}");
}

#[test]
fn exit_codes_distinguish_fail_and_starved() {
    let tmp = tempfile::tempdir().unwrap();
    let strict = write(tmp.path(), "strict.toml", &format!("{RENEWAL}r2_min = 0.999999\n"));
    let dir = tmp.path().join("strict");
    assert_eq!(lab(&["run", &strict, "--out", dir.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(report(&dir)["verdict"], "fail");

    let starved = tmp.path().join("starved");
    let out = lab(&["preset", "thm1.5-finite-set", "--replicas", "50", "--out", starved.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "renewal.toml", RENEWAL);
    let dir = tmp.path().join("a");
    let snapshot = || {
        assert!(lab(&["run", &cfg, "--out", dir.to_str().unwrap()]).status.success());
        ["report.json", "renewal.csv", "replicas.csv"].map(|f| fs::read(dir.join(f)).unwrap())
    };
    let first = snapshot();
    assert!(first == snapshot(), "rerun changed the outputs");
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 5);
    assert_eq!(manifest["replica_seeds"].as_array().map(Vec::len), Some(1000));
}

#[test]
fn export_timeline_writes_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "renewal.toml", RENEWAL);
    let dir = tmp.path().join("tl");
    assert!(lab(&["export-timeline", &cfg, "--replica", "3", "--out", dir.to_str().unwrap()]).status.success());
    for f in ["edges.csv", "events.csv", "flips.csv"] {
        assert!(fs::metadata(dir.join(f)).unwrap().len() > 0, "{f}");
    }
}
