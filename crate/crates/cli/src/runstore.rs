//! Run directory layout and persistence.
//!
//! Every run directory is self-describing:
//!
//! ```text
//! <run>/
//!   config.txt        effective configuration, written before the run
//!   generations.log   line-delimited records: header, one per generation, summary
//!   best_policy.dsl   best evolved program (canonical form)
//!   summary.txt       result fields (no timestamps)
//!   meta.txt          timestamps and wall time, isolated here so byte-level
//!                     determinism checks can exclude this one file
//!   transcript.log    optional code-and-rationale transcript
//! ```

use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result, bail};
use policyevo_core::evolve::{EvolutionRunLog, ParsedRunLog, parse_log};
use policyevo_core::gateway::RecordedCall;

use crate::config::RunConfig;

pub const CONFIG_FILE: &str = "config.txt";
pub const LOG_FILE: &str = "generations.log";
pub const BEST_FILE: &str = "best_policy.dsl";
pub const BEST_REPORT_FILE: &str = "best_report.txt";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const META_FILE: &str = "meta.txt";
pub const TRANSCRIPT_FILE: &str = "transcript.log";

/// Creates the run directory and records the effective config up front.
pub fn prepare_run_dir(dir: &Path, config: &RunConfig, force: bool) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating run directory {}", dir.display()))?;
    let log_path = dir.join(LOG_FILE);
    if log_path.exists() && !force {
        bail!(
            "{} already contains a run; choose a fresh directory or pass --force",
            dir.display()
        );
    }
    std::fs::write(dir.join(CONFIG_FILE), config.to_text())
        .with_context(|| format!("writing {}", dir.join(CONFIG_FILE).display()))?;
    Ok(())
}

/// Writes everything a finished run produces.
pub fn write_run_outputs(
    dir: &Path,
    log: &EvolutionRunLog,
    started: SystemTime,
    wall: Duration,
) -> Result<()> {
    std::fs::write(dir.join(LOG_FILE), log.to_log_text())?;
    std::fs::write(dir.join(BEST_FILE), &log.best.source.text)?;
    if let Some(report) = &log.best.report {
        std::fs::write(dir.join(BEST_REPORT_FILE), format!("{}\n", report.to_line()))?;
    }
    std::fs::write(dir.join(SUMMARY_FILE), summary_text(log))?;

    let started_ms = started.duration_since(UNIX_EPOCH).unwrap_or_default().as_millis();
    let meta = format!(
        "started_at_unix_ms={}\nwall_time_ms={}\n",
        started_ms,
        wall.as_millis()
    );
    std::fs::write(dir.join(META_FILE), meta)?;
    Ok(())
}

/// The Table-1-shaped result fields. Wall time lives in `meta.txt`.
fn summary_text(log: &EvolutionRunLog) -> String {
    let report = log.best.report.as_ref();
    let avg_reward = report.map_or(f64::NAN, |r| r.fitness);
    let success_rate = report.map_or(0.0, |r| r.success_rate);
    let (loc, complexity) = report
        .and_then(|r| r.metrics)
        .map_or((0, 0), |m| (m.lines_of_code, m.cyclomatic_complexity));
    format!(
        "strategy={}\navg_reward={}\nsuccess_rate={}\nllm_calls={}\nloc={}\ncyclomatic_complexity={}\ngenerations_completed={}\nbest_so_far={}\nbudget_exhausted={}\n",
        log.strategy.label(),
        avg_reward,
        success_rate,
        log.total_llm_calls,
        loc,
        complexity,
        log.records.len(),
        log.final_best_fitness(),
        log.budget_exhausted,
    )
}

pub fn write_transcript(dir: &Path, calls: &[RecordedCall]) -> Result<()> {
    let mut out = String::new();
    for (i, call) in calls.iter().enumerate() {
        out.push_str(&format!(
            "call={} generation={} operator={}\n",
            i + 1,
            call.generation,
            call.operator.template_id()
        ));
        match &call.raw_response {
            Some(raw) => {
                let extraction = policyevo_core::gateway::extract(raw);
                match extraction.rationale {
                    Some(r) => out.push_str(&format!("rationale: {r}\n")),
                    None => out.push_str("rationale: (none)\n"),
                }
                match extraction.code {
                    Some(code) => {
                        out.push_str("code:\n");
                        out.push_str(&code);
                    }
                    None => out.push_str("code: (none)\n"),
                }
            }
            None => {
                out.push_str(&format!(
                    "error: {}\n",
                    call.error.as_deref().unwrap_or("unknown")
                ));
            }
        }
        out.push('\n');
    }
    std::fs::write(dir.join(TRANSCRIPT_FILE), out)?;
    Ok(())
}

/// Loads a run's log for reporting.
pub fn load_run_log(dir: &Path) -> Result<ParsedRunLog> {
    let path = dir.join(LOG_FILE);
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_log(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

/// The directory a given batch seed runs in.
pub fn seed_run_dir(out_dir: &Path, seed: u64, batch: bool) -> PathBuf {
    if batch { out_dir.join(format!("seed-{seed}")) } else { out_dir.to_path_buf() }
}
