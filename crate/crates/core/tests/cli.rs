use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_swarm-stability"));
    cmd.current_dir(dir).args(args);
    if let Some(text) = config {
        let path = dir.join("config.json");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn classify_prints_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["classify"],
        Some(r#"{"model":"single_chunk","params":{"lambda":2,"mu":1,"nu":2}}"#),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim_end(), "Transient (λ=2 > λ*=1.181232) [Transience Prop.]");

    let o = run(
        dir.path(),
        &["classify"],
        Some(r#"{"model":"two_chunk","params":{"lambda":100,"mu1":2,"mu2":3,"nu":2}}"#),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("Ergodic"), "{}", stdout(&o));
    assert!(stdout(&o).contains("case 1"), "{}", stdout(&o));
}

#[test]
fn lambda_star_plus_one_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["lambda-star"],
        Some(r#"{"model":"free_plus_one","params":{"mu":1,"nu":2}}"#),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim_end(), "2.0");
}

#[test]
fn config_errors_exit_with_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["simulate"],
        Some(r#"{"model":"two_chunk","params":{"lambda":1,"mu1":1,"mu2":1,"nu":2,"mu3":1}}"#),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mu3"), "{}", stderr(&o));

    let o = run(
        dir.path(),
        &["simulate"],
        Some(r#"{"model":"two_chunk","params":{"lambda":-1,"mu1":1,"mu2":1,"nu":2}}"#),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lambda"), "{}", stderr(&o));

    let o = run(dir.path(), &["simulate"], Some("{\n  \"model\": \"yule\",\n  \"params\": {\"mu\": 1,}\n}"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = run(dir.path(), &["no-such-command"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulation_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // No stationary regime to estimate.
    let o = run(
        dir.path(),
        &["lambda-s", "--reps", "2", "--horizon", "5"],
        Some(r#"{"model":"rbh","params":{"mu_z":2,"nu":1}}"#),
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn validate_passes_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["validate"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().filter(|l| l.starts_with("PASS")).count() >= 4, "{out}");
    assert!(!out.contains("FAIL"), "{out}");
}

#[test]
fn output_files_are_self_describing_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"model":"single_chunk","params":{"lambda":1,"mu":1,"nu":2},"reps":3,"horizon":5}"#;
    let read = |name: &str| std::fs::read_to_string(dir.path().join(name)).unwrap();

    let o = run(dir.path(), &["simulate", "--seed", "9", "--out", "a.csv"], Some(config));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = read("a.csv");
    let o = run(dir.path(), &["simulate", "--seed", "9", "--out", "a.csv"], Some(config));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(first, read("a.csv"));

    let mut lines = first.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# {"));
    let resolved: serde_json::Value = serde_json::from_str(&header[2..]).unwrap();
    assert_eq!(resolved["seed"], 9);
    assert_eq!(resolved["model"], "single_chunk");
    assert_eq!(lines.next(), Some("rep,t,coord0,coord1"));
    assert!(lines.all(|l| l.split(',').count() == 4));

    let o = run(
        dir.path(),
        &["survival", "--seed", "9", "--out", "s.jsonl", "--format", "json-lines"],
        Some(r#"{"model":"killed_yule","params":{"mu":1},"reps":50,"horizon":5}"#),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("survival_prob="));
    let text = read("s.jsonl");
    let rows: Vec<serde_json::Value> = text.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows[0]["metric"], "survival_prob");
    assert_eq!(rows[0]["reps"], 50);
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"model":"yule","params":{"mu":1},"reps":4,"horizon":1,"seed":1}"#;
    let o = run(dir.path(), &["simulate", "--reps", "2", "--horizon", "0.5", "--seed", "5", "--out", "y.csv"], Some(config));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("y.csv")).unwrap();
    let resolved: serde_json::Value = serde_json::from_str(&text.lines().next().unwrap()[2..]).unwrap();
    assert_eq!(resolved["reps"], 2);
    assert_eq!(resolved["horizon"], 0.5);
    assert_eq!(resolved["seed"], 5);
    let reps: std::collections::BTreeSet<&str> = text.lines().skip(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(reps.len(), 2);
}
