//! CSV reports over finished runs: a per-generation convergence table and a
//! per-run summary table. Reports are pure functions of the run logs.

use anyhow::{Result, bail};
use policyevo_core::evolve::ParsedRunLog;

/// Convergence of best-so-far fitness across runs.
///
/// Rows cover generation 1..=longest run; shorter runs are padded with
/// their last value and the `padded` column counts how many runs were
/// padded in that row. The `std` column is the population standard
/// deviation across runs (zero for a single run).
pub fn convergence_csv(runs: &[ParsedRunLog]) -> Result<String> {
    if runs.is_empty() {
        bail!("no runs to report");
    }
    let longest = runs.iter().map(|r| r.records.len()).max().unwrap_or(0);
    let mut out = String::from("generation,mean_best_fitness,std_best_fitness,runs,padded\n");
    for gen_index in 0..longest {
        let mut values = Vec::with_capacity(runs.len());
        let mut padded = 0usize;
        for run in runs {
            let value = match run.records.get(gen_index) {
                Some(record) => record.best_so_far,
                None => {
                    padded += 1;
                    run.records
                        .last()
                        .map(|r| r.best_so_far)
                        .unwrap_or(run.initial_best_fitness)
                }
            };
            values.push(value);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let variance =
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
        let std = variance.sqrt();
        out.push_str(&format!("{},{},{},{},{}\n", gen_index + 1, mean, std, values.len(), padded));
    }
    Ok(out)
}

/// One row per run with the headline result fields.
pub fn summary_csv(runs: &[(String, ParsedRunLog)]) -> Result<String> {
    if runs.is_empty() {
        bail!("no runs to report");
    }
    let mut out = String::from(
        "run,strategy,avg_reward,success_rate,llm_calls,loc,cyclomatic_complexity,generations_completed\n",
    );
    for (name, run) in runs {
        let get = |k: &str| run.summary.get(k).cloned().unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            name,
            run.strategy,
            get("best_fitness"),
            get("success_rate"),
            get("llm_calls"),
            get("loc"),
            get("complexity"),
            get("generations_completed"),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use policyevo_core::evolve::parse_log;

    fn fake_log(generations: usize, offset: f64) -> ParsedRunLog {
        let mut text = String::from(
            "run schema=policyevo-log-v1 template_version=1 strategy=eoh master_seed=1 \
             population_size=10 generations=20 eval_episodes=10 llm_budget=45 \
             initial_best=-100 initial_mean=-150\n",
        );
        for g in 1..=generations {
            let fitness = offset + g as f64;
            text.push_str(&format!(
                "gen generation={g} best_fitness={fitness} mean_fitness=0 best_so_far={fitness} \
                 llm_calls={} discarded=0 dist={fitness} loc=1 complexity=1 depth=0 src=return 0\n",
                g * 5
            ));
        }
        text.push_str(&format!(
            "summary best_fitness={} best_so_far={} success_rate=0.5 llm_calls={} \
             init_discarded=0 budget_exhausted=true generations_completed={generations} loc=1 complexity=1\n",
            offset + generations as f64,
            offset + generations as f64,
            generations * 5
        ));
        parse_log(&text).unwrap()
    }

    #[test]
    fn single_run_has_zero_std() {
        let csv = convergence_csv(&[fake_log(3, 0.0)]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        for line in &lines[1..] {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols[2], "0");
            assert_eq!(cols[4], "0");
        }
    }

    #[test]
    fn five_runs_aggregate_with_mean_and_std() {
        let runs: Vec<ParsedRunLog> = (0..5).map(|i| fake_log(4, i as f64)).collect();
        let csv = convergence_csv(&runs).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        let first: Vec<&str> = lines[1].split(',').collect();
        // Values 1..=5 at generation 1: mean 3, std sqrt(2).
        assert_eq!(first[1], "3");
        assert!((first[2].parse::<f64>().unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(first[3], "5");
    }

    #[test]
    fn unequal_lengths_pad_with_last_value_and_flag() {
        let runs = vec![fake_log(10, 0.0), fake_log(12, 0.0)];
        let csv = convergence_csv(&runs).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 13);
        let row11: Vec<&str> = lines[11].split(',').collect();
        assert_eq!(row11[4], "1", "one run padded at generation 11");
        // Padded value carries the shorter run's last best-so-far (10).
        assert_eq!(row11[1], "10.5");
        let row10: Vec<&str> = lines[10].split(',').collect();
        assert_eq!(row10[4], "0");
    }

    #[test]
    fn summary_rows_mirror_log_summaries() {
        let csv = summary_csv(&[("a".into(), fake_log(3, 5.0))]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("a,eoh,8,0.5,15,1,1,3"));
    }
}
