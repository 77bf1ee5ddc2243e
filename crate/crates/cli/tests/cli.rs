use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rough-taylor"));
    c.env_remove("ROUGH_TAYLOR_THREADS");
    c
}

fn run(args: &[&str], config: Option<&Path>, out: &Path) -> Output {
    let mut c = bin();
    if let Some(cfg) = config {
        c.arg("--config").arg(cfg);
    }
    c.args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn digest(path: &Path) -> String {
    hex::encode(Sha256::digest(fs::read(path).unwrap()))
}

#[test]
fn simulate_writes_reproducible_path_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.json", r#"{"hurst":[0.7],"n_fine":4096,"seed":9}"#);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = run(&["simulate"], Some(&cfg), &a);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("terminal mean"));
    assert_eq!(code(&run(&["simulate"], Some(&cfg), &b)), 0);

    let files: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "bin"))
        .collect();
    assert_eq!(files.len(), 1);
    let pa = a.join("path_00000.bin");
    assert_eq!(digest(&pa), digest(&b.join("path_00000.bin")));

    let sig = rough_taylor::DrivingSignal::load(&pa).unwrap();
    let spec = sig.spec().unwrap();
    assert_eq!((spec.m, spec.n_fine, spec.seed), (1, 4096, 9));
    assert_eq!(spec.hurst.value(1), 0.7);

    // the manifest lists every output with its checksum
    let m = json(&a.join("manifest.json"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["seed"], 9);
    let listed = m["outputs"].as_array().unwrap();
    let entry = listed.iter().find(|o| o["path"] == "path_00000.bin").unwrap();
    assert_eq!(entry["sha256"], digest(&pa));
    assert_eq!(json(&a.join("summary.json"))["manifest"]["config_hash"], m["config_hash"]);

    // --seed overrides the config
    let c = dir.path().join("c");
    assert_eq!(code(&run(&["simulate", "--seed", "10"], Some(&cfg), &c)), 0);
    assert_ne!(digest(&pa), digest(&c.join("path_00000.bin")));
}

#[test]
fn invalid_hurst_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"hurst":[1.2],"n_fine":4096}"#);
    let o = run(&["simulate"], Some(&cfg), &dir.path().join("o"));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1.2"));
    let cfg = write(dir.path(), "typo.json", r#"{"hurst":[0.7],"n_fine":4096,"sed":1}"#);
    assert_eq!(code(&run(&["simulate"], Some(&cfg), &dir.path().join("o"))), 2);
    assert_eq!(code(&run(&["simulate"], None, &dir.path().join("o"))), 2);
}

#[test]
fn manifest_reruns_the_same_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.json", r#"{"hurst":[1.0,0.65],"n_fine":1024,"seed":4,"paths":2}"#);
    let a = dir.path().join("a");
    assert_eq!(code(&run(&["simulate"], Some(&cfg), &a)), 0);
    let b = dir.path().join("b");
    assert_eq!(code(&run(&["simulate"], Some(&a.join("manifest.json")), &b)), 0);
    let (ma, mb) = (json(&a.join("manifest.json")), json(&b.join("manifest.json")));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    assert_eq!(ma["outputs"], mb["outputs"]);
}

#[test]
fn euler_on_linear_model_gives_n_plus_one_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "solve.json",
        r#"{"model":{"kind":"builtin","name":"linear_scalar"},"hurst":[0.7],"n_fine":1024,
            "seed":3,"paths":2,"scheme":{"kind":"euler"},"n_values":[64,128]}"#,
    );
    let out = dir.path().join("o");
    let o = run(&["solve"], Some(&cfg), &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for n in [64, 128] {
        for p in 0..2 {
            let csv = fs::read_to_string(out.join(format!("euler_n{n}_path{p:05}.csv"))).unwrap();
            let mut lines = csv.lines();
            assert_eq!(lines.next(), Some("t,y1"));
            assert_eq!(lines.count(), n + 1);
        }
    }
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["diverged"], 0);
    assert_eq!(summary["runs"].as_array().unwrap().len(), 4);
}

#[test]
fn constructor_set_matches_explicit_members() {
    let dir = tempfile::tempdir().unwrap();
    let body = |set: &str| {
        format!(
            r#"{{"model":{{"kind":"builtin","name":"sine_field"}},"hurst":[1.0,0.7,0.7],"n_fine":1024,
                "seed":3,"paths":3,"scheme":{{"kind":"incomplete","set":{set}}},"n_values":[32,64]}}"#
        )
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let ca = write(dir.path(), "rho.json", &body(r#"{"gamma_rho":"2H - 1"}"#));
    let cb = write(dir.path(), "set.json", &body(r#"{"m":3,"members":[[1],[2],[3]]}"#));
    assert_eq!(code(&run(&["solve"], Some(&ca), &a)), 0);
    assert_eq!(code(&run(&["solve"], Some(&cb), &b)), 0);
    for n in [32, 64] {
        for p in 0..3 {
            let name = format!("incomplete_n{n}_path{p:05}.csv");
            assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name}");
        }
    }
}

#[test]
fn divergence_warns_and_fails_only_when_strict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "div.json",
        r#"{"model":{"kind":"polynomial","y0":[1.0],
              "field":{"d":1,"m":1,"terms":[{"j":1,"i":1,"monomial":[2],"coeff":1000.0}]}},
            "hurst":[0.7],"n_fine":1024,"seed":3,"scheme":{"kind":"euler"},"n_values":[64]}"#,
    );
    let o = run(&["solve"], Some(&cfg), &dir.path().join("a"));
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverged"));
    let o = run(&["solve", "--strict"], Some(&cfg), &dir.path().join("b"));
    assert_ne!(code(&o), 0);
    assert_eq!(json(&dir.path().join("b/manifest.json"))["status"], "diverged");
}

#[test]
fn mismatched_model_and_signal_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"model":{"kind":"builtin","name":"sine_field"},"hurst":[0.7],"n_fine":1024,
            "scheme":{"kind":"euler"},"n_values":[64]}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(code(&run(&["solve"], Some(&cfg), &out)), 2);
    assert!(!out.exists());
}

#[test]
fn rate_plan_guards() {
    let dir = tempfile::tempdir().unwrap();
    let plan = |paths: usize, ns: &str| {
        format!(
            r#"{{"name":"tiny","model":{{"kind":"builtin","name":"sin_scalar"}},"hurst":[0.7],"n_fine":1024,
                "n_values":{ns},"paths":{paths},"seed":1,"experiments":[{{"type":"lp","scheme":{{"kind":"euler"}}}}]}}"#
        )
    };
    let one = write(dir.path(), "one.json", &plan(1, "[8,16,32,64]"));
    let o = run(&["rates"], Some(&one), &dir.path().join("a"));
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let short = write(dir.path(), "short.json", &plan(40, "[8,16,32]"));
    assert_eq!(code(&run(&["rates"], Some(&short), &dir.path().join("b"))), 3);
    assert_eq!(code(&run(&["rates", "no_such_plan"], None, &dir.path().join("c"))), 2);
}

#[test]
fn small_rate_plan_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "nu.json",
        r#"{"name":"small","hurst":[0.65],"n_fine":2048,"n_values":[64,128,256,512],"paths":400,"seed":2,
            "experiments":[{"type":"nu","alpha":[1]},{"type":"nu","alpha":[1,1],"tolerance":0.1}]}"#,
    );
    let out = dir.path().join("o");
    let o = run(&["rates"], Some(&cfg), &out);
    assert_eq!(code(&o), 0, "{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("small.nu.1.1.json"));
    for key in ["slope", "ci", "theory", "verdict"] {
        assert!(report.get(key).is_some());
    }
    assert_eq!(report["manifest"]["file"], "manifest.json");
    let csv = fs::read_to_string(out.join("small.nu.1.1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let plot = fs::read_to_string(out.join("plotdata.csv")).unwrap();
    assert!(plot.starts_with("report,series,n,value"));
    assert_eq!(json(&out.join("summary.json"))["pass"], true);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "nu.json",
        r#"{"name":"t","hurst":[0.7],"n_fine":1024,"n_values":[16,32,64,128],"paths":64,"seed":2,
            "experiments":[{"type":"omega","alpha":[1,1],"tolerance":10.0}]}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&run(&["rates", "--threads", "1"], Some(&cfg), &a)), 0);
    let o = bin()
        .env("ROUGH_TAYLOR_THREADS", "3")
        .args(["rates", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&b)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(json(&b.join("manifest.json"))["threads"], 3);
    let name = "t.omega.1.1.json";
    assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
}

#[test]
fn builtin_euler_plan_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = run(&["rates", "euler_h07"], None, &out);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out.join("euler_h07.lp.euler.json"));
    assert_eq!(r["verdict"], "pass");
    assert!((r["theory"].as_f64().unwrap() + 0.4).abs() < 1e-12);
}

#[test]
fn builtin_modified_euler_plan_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = run(&["rates", "modified_euler_h07"], None, &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = json(&out.join("modified_euler_h07.lp.modified_euler.json"));
    assert_eq!(r["verdict"], "pass");
    assert!((r["theory"].as_f64().unwrap() + 0.9).abs() < 1e-12);
}

#[test]
fn check_suites() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["combinatorics", "jets", "integrals"] {
        let out = dir.path().join(suite);
        let o = run(&["check", suite], None, &out);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        let summary = json(&out.join("check.json"));
        assert_eq!(summary["passed"], true);
        for c in summary["checks"].as_array().unwrap() {
            assert!(c["max_discrepancy"].as_f64().unwrap() <= c["tolerance"].as_f64().unwrap());
        }
    }
    let combo = json(&dir.path().join("combinatorics/check.json"));
    let duality = &combo["checks"][0];
    assert_eq!(duality["name"], "xi_theta_duality");
    assert!(duality["cases"].as_u64().unwrap() > 300);
    let integrals = json(&dir.path().join("integrals/check.json"));
    assert!(integrals["checks"].as_array().unwrap().iter().all(|c| c["cases"] == 200));
    assert_eq!(code(&run(&["check", "nonsense"], None, &dir.path().join("x"))), 2);
}
