use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn instances() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uniform-lpt"))
        .args(args)
        .env_remove("UNIFORM_LPT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn file(name: &str) -> String {
    instances().join(name).to_string_lossy().into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn rho_three() {
    let o = cli(&["rho", "--m", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1.383673\n");
}

#[test]
fn ratio_on_graham_example() {
    let o = cli(&["ratio", &file("graham-m2.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ratio:  1.166667"), "{}", stdout(&o));
    let v = json(&cli(&["ratio", &file("graham-m2.json"), "--format", "json"]));
    assert_eq!(v["lpt"], 7.0);
    assert_eq!(v["opt"], 6.0);
    assert_eq!(v["ratio"].as_f64().unwrap(), 7.0 / 6.0);
}

#[test]
fn generated_worst_case_round_trips_through_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gis2.json");
    let path = path.to_str().unwrap();
    assert!(cli(&["gen-worst", "--m", "2", "-o", path]).status.success());
    let v = json(&cli(&["ratio", path, "--format", "json"]));
    assert!((v["ratio"].as_f64().unwrap() - 1.280776).abs() < 1e-6);
    assert!((v["opt"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn shipped_tight_instances_match_generator() {
    for m in 2..=5 {
        let o = cli(&["gen-worst", "--m", &m.to_string()]);
        let shipped = std::fs::read_to_string(instances().join(format!("gis-m{m}.json"))).unwrap();
        assert_eq!(stdout(&o), shipped);
    }
}

#[test]
fn schedules_in_every_format() {
    let f = file("graham-m2.json");
    let text = stdout(&cli(&["lpt", &f]));
    assert!(text.contains("processor 1 (speed 1): tasks [1 3 5] load 7 finish 7"), "{text}");
    assert!(text.contains("makespan: 7"));

    let v = json(&cli(&["opt", &f, "--format", "json"]));
    assert_eq!(v["makespan"], 6.0);
    assert!(v["nodes_explored"].as_u64().unwrap() > 0);
    assert_eq!(v["assignment"].as_array().unwrap().len(), 5);

    let csv = stdout(&cli(&["lpt", &f, "--format", "csv"]));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("processor,speed,tasks,load,finish"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let args = ["search", "--m", "2", "--n-max", "4", "--restarts", "6", "--steps", "40", "--seed", "9", "--format", "json"];
    let a = cli(&args);
    let b = cli(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    for key in ["best_instance", "best_ratio", "ratio_bound", "exceeded", "instances_evaluated"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let base = ["search", "--m", "2", "--n-max", "3", "--restarts", "4", "--steps", "30", "--format", "json"];
    let mut with_flag = base.to_vec();
    with_flag.extend(["--seed", "42"]);
    let flagged = cli(&with_flag);
    let from_env = Command::new(env!("CARGO_BIN_EXE_uniform-lpt"))
        .args(base)
        .env("UNIFORM_LPT_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(flagged.stdout, from_env.stdout);
    let other = cli(&base);
    assert_ne!(flagged.stdout, other.stdout);
}

#[test]
fn certify_verdicts() {
    let v = json(&cli(&["certify", &file("gis-m3.json"), "--format", "json"]));
    assert_eq!(v["verdict"], "consistent-with-minimality");
    assert!((v["rho_I"].as_f64().unwrap() - 1.383673).abs() < 1e-6);

    let o = cli(&["certify", &file("degenerate-few-tasks.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("verdict: certified-non-minimal"), "{text}");
    assert!(text.contains("empty-processor"));
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&[]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["ratio", &file("degenerate-zero-task.json")]).status.code(), Some(2));
    assert_eq!(cli(&["lpt", &file("degenerate-zero-task.json")]).status.code(), Some(0));
    let o = cli(&["ratio", &file("missing.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(cli(&["opt", &file("gis-m5.json"), "--budget", "1"]).status.code(), Some(1));
}

#[test]
fn quick_verification_passes_within_a_minute() {
    let start = Instant::now();
    let o = cli(&["verify", "--level", "quick"]);
    let took = start.elapsed();
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 8, "{text}");
    assert!(took < Duration::from_secs(60), "{took:?}");
}
