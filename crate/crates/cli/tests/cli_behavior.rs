//! End-to-end command behavior through the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_policyevo")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("policyevo-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/three_phase.dsl")
}

fn run(args: &[&str]) -> Output {
    Command::new(binary()).args(args).env_remove("OPENAI_API_KEY").output().unwrap()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("missing `{key}=` in:\n{text}"))
        .to_string()
}

#[test]
fn evolve_writes_a_self_describing_run_dir() {
    let dir = scratch("rundir");
    let out = run(&[
        "evolve", "--backend", "mock", "--seed", "4", "--generations", "3",
        "--out", dir.join("r").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in
        ["config.txt", "generations.log", "best_policy.dsl", "best_report.txt", "summary.txt", "meta.txt"]
    {
        assert!(dir.join("r").join(file).exists(), "missing {file}");
    }
    // The best policy file is valid DSL.
    let best = std::fs::read_to_string(dir.join("r/best_policy.dsl")).unwrap();
    policyevo_core::lang::parse_text(&best).expect("best policy parses");
    // Rerunning without --force refuses to clobber, with it succeeds.
    let refuse = run(&[
        "evolve", "--backend", "mock", "--seed", "4", "--generations", "3",
        "--out", dir.join("r").to_str().unwrap(),
    ]);
    assert_eq!(refuse.status.code(), Some(1));
    let forced = run(&[
        "evolve", "--backend", "mock", "--seed", "4", "--generations", "3", "--force",
        "--out", dir.join("r").to_str().unwrap(),
    ]);
    assert!(forced.status.success());
}

#[test]
fn evolve_respects_budget_flag_in_summary() {
    let dir = scratch("budget");
    let out = run(&[
        "evolve", "--backend", "mock", "--strategy", "eoh", "--seed", "2",
        "--llm-budget", "45", "--out", dir.join("r").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary = std::fs::read_to_string(dir.join("r/summary.txt")).unwrap();
    let calls: u32 = field(&summary, "llm_calls").parse().unwrap();
    assert!(calls <= 45, "llm_calls {calls} over budget");
    assert_eq!(field(&summary, "budget_exhausted"), "true");
    assert!(stdout(&out).contains("budget exhausted"));
}

#[test]
fn eval_reports_fixture_quality() {
    let out = run(&["eval", fixture_path().to_str().unwrap(), "--episodes", "100", "--seed", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let success: f64 = field(&text, "success_rate").parse().unwrap();
    assert!(success > 0.0, "fixture should beat the random baseline's zero");
    assert!((0.0..=1.0).contains(&success));
    assert_eq!(field(&text, "loc"), "18");
    assert_eq!(field(&text, "cyclomatic_complexity"), "14");
}

#[test]
fn eval_single_episode_average_is_that_episode() {
    let dir = scratch("eval1");
    let zero = dir.join("zero.dsl");
    std::fs::write(&zero, "return 0\n").unwrap();
    let one = run(&["eval", zero.to_str().unwrap(), "--episodes", "1", "--seed", "5"]);
    assert!(one.status.success());
    let text = stdout(&one);
    assert_eq!(field(&text, "success_rate"), "0");
    // Average over one episode equals that episode's total: evaluating
    // twice reproduces it exactly.
    let again = run(&["eval", zero.to_str().unwrap(), "--episodes", "1", "--seed", "5"]);
    assert_eq!(field(&text, "avg_reward"), field(&stdout(&again), "avg_reward"));
}

#[test]
fn eval_rejects_bad_policy_files_with_diagnostics() {
    let dir = scratch("evalbad");
    let bad = dir.join("bad.dsl");
    std::fs::write(&bad, "if y > : return 1\nreturn 0\n").unwrap();
    let out = run(&["eval", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1:8"), "diagnostic with line:col, got: {err}");
}

#[test]
fn trace_writes_eleven_column_lines_and_a_marker() {
    let dir = scratch("trace");
    let trace_file = dir.join("t.txt");

    let zero = dir.join("zero.dsl");
    std::fs::write(&zero, "return 0\n").unwrap();
    let out = run(&[
        "trace", zero.to_str().unwrap(), "--seed", "0", "--out", trace_file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&trace_file).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() > 2);
    for line in &lines[..lines.len() - 1] {
        assert_eq!(line.split(' ').count(), 11, "step line: {line}");
    }
    let last = lines.last().unwrap();
    assert!(last.starts_with("end termination=Crashed"), "trailer: {last}");

    // Same inputs, identical file.
    let rerun_file = dir.join("t2.txt");
    let rerun = run(&[
        "trace", zero.to_str().unwrap(), "--seed", "0", "--out", rerun_file.to_str().unwrap(),
    ]);
    assert!(rerun.status.success());
    assert_eq!(std::fs::read(&trace_file).unwrap(), std::fs::read(&rerun_file).unwrap());
}

#[test]
fn report_aggregates_runs_of_different_lengths() {
    let dir = scratch("report");
    // Two strategies at the same 45-call budget stop at different
    // generation counts (9 vs 12), exercising the padding path.
    for (strategy, sub) in [("eoh", "a"), ("evoengineer", "b")] {
        let out = run(&[
            "evolve", "--backend", "mock", "--strategy", strategy, "--seed", "3",
            "--llm-budget", "45", "--out", dir.join(sub).to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let out = run(&[
        "report",
        dir.join("a").to_str().unwrap(),
        dir.join("b").to_str().unwrap(),
        "--out",
        dir.join("csv").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let convergence = std::fs::read_to_string(dir.join("csv/convergence.csv")).unwrap();
    let lines: Vec<&str> = convergence.lines().collect();
    assert_eq!(lines[0], "generation,mean_best_fitness,std_best_fitness,runs,padded");
    assert_eq!(lines.len(), 13, "rows cover the longer run (12 generations)");
    let last: Vec<&str> = lines[12].split(',').collect();
    assert_eq!(last[3], "2");
    assert_eq!(last[4], "1", "the 9-generation run is padded at generation 12");

    let summary = std::fs::read_to_string(dir.join("csv/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.contains(",eoh,"));
    assert!(summary.contains(",evoengineer,"));
}

#[test]
fn report_rejects_schema_mismatch() {
    let dir = scratch("schema");
    std::fs::create_dir_all(dir.join("r")).unwrap();
    std::fs::write(
        dir.join("r/generations.log"),
        "run schema=policyevo-log-v999 strategy=eoh\n",
    )
    .unwrap();
    let out = run(&["report", dir.join("r").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SchemaMismatch"));
}

#[test]
fn live_backend_requires_credential_before_running() {
    let dir = scratch("auth");
    let out = run(&["evolve", "--backend", "live", "--out", dir.join("r").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("AuthError"), "{err}");
    // Failing fast means no generation log was produced.
    assert!(!dir.join("r/generations.log").exists());
}

#[test]
fn batch_seeds_produce_independent_run_dirs() {
    let dir = scratch("batch");
    let out = run(&[
        "evolve", "--backend", "mock", "--seeds", "1,2", "--generations", "2",
        "--out", dir.join("runs").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let log1 = std::fs::read_to_string(dir.join("runs/seed-1/generations.log")).unwrap();
    let log2 = std::fs::read_to_string(dir.join("runs/seed-2/generations.log")).unwrap();
    assert_ne!(log1, log2, "different seeds should diverge");
    assert!(log1.contains("master_seed=1"));
    assert!(log2.contains("master_seed=2"));
}

#[test]
fn unknown_flags_exit_with_usage_code() {
    let out = run(&["evolve", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_file_drives_the_run() {
    let dir = scratch("configfile");
    let config_path = dir.join("config.txt");
    std::fs::write(
        &config_path,
        "backend = mock\nevo.strategy = funsearch\nevo.generations = 2\nevo.master_seed = 8\n",
    )
    .unwrap();
    let out = run(&[
        "evolve", "--config", config_path.to_str().unwrap(),
        "--out", dir.join("r").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let written = std::fs::read_to_string(dir.join("r/config.txt")).unwrap();
    assert!(written.contains("evo.strategy=funsearch"));
    assert!(written.contains("evo.master_seed=8"));
    let summary = std::fs::read_to_string(dir.join("r/summary.txt")).unwrap();
    assert!(summary.contains("strategy=funsearch"));
    assert!(summary.contains("generations_completed=2"));
}
