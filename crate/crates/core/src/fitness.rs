//! Policy fitness over seeded episode batches.
//!
//! Fitness is the arithmetic mean of episode totals over the seed list; any
//! policy fault in any episode (invalid action, arithmetic fault, budget
//! exhaustion, or an unparseable source) poisons the whole report down to
//! the `MIN_FITNESS` sentinel.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::lang::{
    DEFAULT_EVAL_BUDGET, EvalError, InterpretabilityMetrics, LangError, PolicyAst, PolicySource,
    SourceOrigin, evaluate, measure, pretty_print,
};
use crate::sim::{self, EpisodeFailure, SimConfig, TerminationKind};

/// Sentinel fitness for any policy that faults during evaluation.
///
/// Strictly below every achievable episode mean: with the default constants
/// the reachable state box (|x| <= 1.5, y <= ceiling, wrapped attitude)
/// bounds an episode total above roughly -1.35e3 even for adversarial
/// spin-and-dive policies, and the margin covers generous config overrides.
pub const MIN_FITNESS: f64 = -2000.0;

/// Behavioral summary over the completed episodes of one evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct FailureStats {
    pub crash_count: usize,
    pub landed_count: usize,
    pub timeout_count: usize,
    pub out_of_bounds_count: usize,
    /// Mean vertical speed at ground contact (landed + crashed episodes).
    pub mean_touchdown_vy: f64,
    /// Mean |x| of the final state across episodes.
    pub mean_final_abs_x: f64,
    pub mean_fuel_used: f64,
    pub mean_episode_length: f64,
}

impl FailureStats {
    /// Fixed field order used in run logs and in prompts.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        alloc::vec![
            ("crash_count", self.crash_count.to_string()),
            ("landed_count", self.landed_count.to_string()),
            ("timeout_count", self.timeout_count.to_string()),
            ("out_of_bounds_count", self.out_of_bounds_count.to_string()),
            ("mean_touchdown_vy", format_stat(self.mean_touchdown_vy)),
            ("mean_final_abs_x", format_stat(self.mean_final_abs_x)),
            ("mean_fuel_used", format_stat(self.mean_fuel_used)),
            ("mean_episode_length", format_stat(self.mean_episode_length)),
        ]
    }
}

fn format_stat(v: f64) -> String {
    // Three decimals keeps prompt and log lines short.
    alloc::format!("{:.3}", v)
}

/// Why an evaluation collapsed to `MIN_FITNESS`.
#[derive(Clone, Debug, PartialEq)]
pub enum EvaluationError {
    /// The source text failed to parse or validate.
    Rejected { message: String },
    /// The program produced an action outside {0,1,2,3}.
    InvalidAction { episode: usize, step: usize, value: f64 },
    /// Division by zero or a non-finite intermediate.
    Arithmetic { episode: usize, step: usize, detail: String },
    /// Node-evaluation budget exhausted.
    BudgetExceeded { episode: usize, step: usize },
}

impl EvaluationError {
    pub fn describe(&self) -> String {
        match self {
            EvaluationError::Rejected { message } => alloc::format!("rejected: {message}"),
            EvaluationError::InvalidAction { episode, step, value } => {
                alloc::format!("episode {episode} step {step}: invalid action {value}")
            }
            EvaluationError::Arithmetic { episode, step, detail } => {
                alloc::format!("episode {episode} step {step}: {detail}")
            }
            EvaluationError::BudgetExceeded { episode, step } => {
                alloc::format!("episode {episode} step {step}: evaluation budget exceeded")
            }
        }
    }
}

/// The fitness record for one policy over one seed list.
#[derive(Clone, Debug, PartialEq)]
pub struct FitnessReport {
    /// Mean episode total, or `MIN_FITNESS` when `evaluation_error` is set.
    pub fitness: f64,
    pub episode_rewards: Vec<f64>,
    pub success_rate: f64,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub failure_stats: FailureStats,
    /// Absent when the source never parsed.
    pub metrics: Option<InterpretabilityMetrics>,
    pub evaluation_error: Option<EvaluationError>,
}

impl FitnessReport {
    pub fn errored(&self) -> bool {
        self.evaluation_error.is_some()
    }

    /// One-line structured record with fixed field names, for run logs:
    /// `fitness= success_rate= episodes= seeds= rewards= <failure stats>
    /// loc= complexity= depth= error=`. List fields are comma-joined;
    /// `error` holds `-` when the evaluation was clean.
    pub fn to_line(&self) -> String {
        let join = |values: &[String]| {
            let mut out = String::new();
            for (i, v) in values.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(v);
            }
            out
        };
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        let rewards: Vec<String> =
            self.episode_rewards.iter().map(|r| alloc::format!("{r}")).collect();
        let mut line = alloc::format!(
            "fitness={} success_rate={} episodes={} seeds={} rewards={}",
            self.fitness,
            self.success_rate,
            self.episodes,
            join(&seeds),
            join(&rewards),
        );
        for (name, value) in self.failure_stats.to_key_values() {
            line.push_str(&alloc::format!(" {name}={value}"));
        }
        match self.metrics {
            Some(m) => line.push_str(&alloc::format!(
                " loc={} complexity={} depth={}",
                m.lines_of_code, m.cyclomatic_complexity, m.max_nesting_depth
            )),
            None => line.push_str(" loc=- complexity=- depth=-"),
        }
        match &self.evaluation_error {
            Some(err) => {
                // Keep the record one line and one token per field.
                let described = err.describe().replace([' ', '\n'], "_");
                line.push_str(&alloc::format!(" error={described}"));
            }
            None => line.push_str(" error=-"),
        }
        line
    }
}

/// Evaluates a parsed policy over one episode per seed.
///
/// All faults are absorbed: the report either aggregates every episode or
/// carries `MIN_FITNESS` plus the first fault. Remaining episodes are
/// skipped once a fault occurs.
pub fn evaluate_policy(
    config: &SimConfig,
    ast: &PolicyAst,
    seeds: &[u64],
    max_steps: usize,
) -> FitnessReport {
    assert!(!seeds.is_empty(), "seed list must be non-empty");
    let metrics = measure(ast, &PolicySource::new(pretty_print(ast), SourceOrigin::Seed));

    let mut episode_rewards = Vec::with_capacity(seeds.len());
    let mut successes = 0usize;
    let mut stats = StatAccumulator::default();
    let mut evaluation_error = None;

    for (episode, &seed) in seeds.iter().enumerate() {
        let rollout = sim::run_episode(
            config,
            |s| evaluate(ast, s, DEFAULT_EVAL_BUDGET).map(|a| a.index() as i64),
            seed,
            max_steps,
        );
        match rollout {
            Ok(trace) => {
                episode_rewards.push(trace.total_reward);
                if trace.success {
                    successes += 1;
                }
                stats.add(&trace);
            }
            Err(failure) => {
                evaluation_error = Some(match failure {
                    EpisodeFailure::Policy { step, cause } => match cause {
                        EvalError::InvalidActionResult { value } => {
                            EvaluationError::InvalidAction { episode, step, value }
                        }
                        EvalError::ArithmeticFault { detail } => EvaluationError::Arithmetic {
                            episode,
                            step,
                            detail: detail.to_string(),
                        },
                        EvalError::BudgetExceeded => {
                            EvaluationError::BudgetExceeded { episode, step }
                        }
                    },
                    // `evaluate` range-checks before returning, so this arm
                    // only fires for non-DSL callbacks; keep it total anyway.
                    EpisodeFailure::InvalidAction { step, value } => {
                        EvaluationError::InvalidAction { episode, step, value: value as f64 }
                    }
                });
                break;
            }
        }
    }

    let completed = episode_rewards.len();
    let fitness = if evaluation_error.is_some() { MIN_FITNESS } else { mean(&episode_rewards) };
    let success_rate = if completed == 0 { 0.0 } else { successes as f64 / completed as f64 };

    FitnessReport {
        fitness,
        episode_rewards,
        success_rate,
        episodes: seeds.len(),
        seeds: seeds.to_vec(),
        failure_stats: stats.finish(),
        metrics: Some(metrics),
        evaluation_error,
    }
}

/// Parses then evaluates; rejection is just another road to `MIN_FITNESS`.
pub fn evaluate_source(
    config: &SimConfig,
    source: &PolicySource,
    seeds: &[u64],
    max_steps: usize,
) -> FitnessReport {
    match crate::lang::parse(source) {
        Ok(ast) => evaluate_policy(config, &ast, seeds, max_steps),
        Err(err) => rejected_report(&err, seeds),
    }
}

fn rejected_report(err: &LangError, seeds: &[u64]) -> FitnessReport {
    FitnessReport {
        fitness: MIN_FITNESS,
        episode_rewards: Vec::new(),
        success_rate: 0.0,
        episodes: seeds.len(),
        seeds: seeds.to_vec(),
        failure_stats: StatAccumulator::default().finish(),
        metrics: None,
        evaluation_error: Some(EvaluationError::Rejected { message: alloc::format!("{err}") }),
    }
}

/// Mean with plain left-to-right accumulation; the independent oracle in the
/// acceptance suite reproduces this exact order.
fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for v in values {
        sum += v;
    }
    sum / values.len() as f64
}

#[derive(Default)]
struct StatAccumulator {
    episodes: usize,
    crash: usize,
    landed: usize,
    timeout: usize,
    oob: usize,
    touchdown_vy_sum: f64,
    touchdowns: usize,
    final_abs_x_sum: f64,
    fuel_sum: f64,
    length_sum: f64,
}

impl StatAccumulator {
    fn add(&mut self, trace: &crate::sim::EpisodeTrace) {
        self.episodes += 1;
        match trace.termination_kind {
            TerminationKind::Crashed => self.crash += 1,
            TerminationKind::Landed => self.landed += 1,
            TerminationKind::TimeLimit => self.timeout += 1,
            TerminationKind::OutOfBounds => self.oob += 1,
            TerminationKind::Running => unreachable!("episode traces always terminate"),
        }
        let last = trace.states.last().expect("non-empty trace");
        if matches!(trace.termination_kind, TerminationKind::Crashed | TerminationKind::Landed) {
            self.touchdown_vy_sum += last.vy;
            self.touchdowns += 1;
        }
        self.final_abs_x_sum += last.x.abs();
        self.fuel_sum += trace.fuel_used;
        self.length_sum += trace.steps as f64;
    }

    fn finish(self) -> FailureStats {
        let div = |sum: f64, n: usize| if n == 0 { 0.0 } else { sum / n as f64 };
        FailureStats {
            crash_count: self.crash,
            landed_count: self.landed,
            timeout_count: self.timeout,
            out_of_bounds_count: self.oob,
            mean_touchdown_vy: div(self.touchdown_vy_sum, self.touchdowns),
            mean_final_abs_x: div(self.final_abs_x_sum, self.episodes),
            mean_fuel_used: div(self.fuel_sum, self.episodes),
            mean_episode_length: div(self.length_sum, self.episodes),
        }
    }
}

/// Ranking order for selection and replacement: `Less` means `a` ranks
/// ahead of `b`. Fitness descending, then success rate descending, then
/// lower cyclomatic complexity; full ties are `Equal` so a stable sort
/// preserves insertion order.
pub fn compare_fitness(a: &FitnessReport, b: &FitnessReport) -> core::cmp::Ordering {
    b.fitness
        .total_cmp(&a.fitness)
        .then_with(|| b.success_rate.total_cmp(&a.success_rate))
        .then_with(|| complexity_key(a).cmp(&complexity_key(b)))
}

fn complexity_key(r: &FitnessReport) -> usize {
    r.metrics.map_or(usize::MAX, |m| m.cyclomatic_complexity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_text;
    use crate::rng::DetRng;

    fn cfg() -> SimConfig {
        SimConfig::default()
    }

    fn seeds(n: u64) -> Vec<u64> {
        (0..n).collect()
    }

    #[test]
    fn invalid_action_policy_gets_min_fitness() {
        let ast = parse_text("return 7").unwrap();
        let report = evaluate_policy(&cfg(), &ast, &seeds(5), 1000);
        assert_eq!(report.fitness, MIN_FITNESS);
        assert!(matches!(
            report.evaluation_error,
            Some(EvaluationError::InvalidAction { episode: 0, step: 0, value }) if value == 7.0
        ));
    }

    #[test]
    fn division_by_zero_gets_min_fitness() {
        let ast = parse_text("if y / 0 > 1: return 1\nreturn 0").unwrap();
        let report = evaluate_policy(&cfg(), &ast, &seeds(3), 1000);
        assert_eq!(report.fitness, MIN_FITNESS);
        assert!(matches!(report.evaluation_error, Some(EvaluationError::Arithmetic { .. })));
    }

    #[test]
    fn rejected_source_gets_min_fitness() {
        let source = PolicySource::new("if y > 0.6: return 2", SourceOrigin::LlmGenerated);
        let report = evaluate_source(&cfg(), &source, &seeds(3), 1000);
        assert_eq!(report.fitness, MIN_FITNESS);
        assert!(report.metrics.is_none());
        assert!(matches!(report.evaluation_error, Some(EvaluationError::Rejected { .. })));
    }

    #[test]
    fn single_episode_fitness_is_that_total() {
        let ast = parse_text("return 0").unwrap();
        let report = evaluate_policy(&cfg(), &ast, &[17], 1000);
        let trace =
            sim::run_episode::<core::convert::Infallible, _>(&cfg(), |_| Ok(0), 17, 1000).unwrap();
        assert_eq!(report.fitness, trace.total_reward);
        assert_eq!(report.episode_rewards, alloc::vec![trace.total_reward]);
    }

    #[test]
    fn fitness_is_exact_mean_and_stats_partition() {
        let ast = parse_text("if vy < -0.5: return 2\nreturn 0").unwrap();
        let s = seeds(10);
        let report = evaluate_policy(&cfg(), &ast, &s, 1000);
        assert!(report.evaluation_error.is_none());
        let mut sum = 0.0;
        for r in &report.episode_rewards {
            sum += r;
        }
        assert_eq!(report.fitness, sum / 10.0);
        let st = &report.failure_stats;
        assert_eq!(
            st.crash_count + st.landed_count + st.timeout_count + st.out_of_bounds_count,
            10
        );
        assert!(st.mean_episode_length > 0.0);
    }

    #[test]
    fn free_fall_success_rate_is_zero() {
        let ast = parse_text("return 0").unwrap();
        let report = evaluate_policy(&cfg(), &ast, &seeds(10), 1000);
        assert_eq!(report.success_rate, 0.0);
        assert_eq!(report.failure_stats.crash_count, 10);
        assert!(report.failure_stats.mean_touchdown_vy < -1.0);
    }

    #[test]
    fn reports_are_reproducible() {
        let ast = parse_text("if vy < -0.4: return 2\nreturn 0").unwrap();
        let a = evaluate_policy(&cfg(), &ast, &seeds(6), 1000);
        let b = evaluate_policy(&cfg(), &ast, &seeds(6), 1000);
        assert_eq!(a, b);
    }

    #[test]
    fn comparison_ranks_fitness_then_success_then_simplicity() {
        let mk = |fitness: f64, success_rate: f64, complexity: usize| FitnessReport {
            fitness,
            episode_rewards: Vec::new(),
            success_rate,
            episodes: 0,
            seeds: Vec::new(),
            failure_stats: StatAccumulator::default().finish(),
            metrics: Some(InterpretabilityMetrics {
                lines_of_code: 1,
                cyclomatic_complexity: complexity,
                max_nesting_depth: 0,
            }),
            evaluation_error: None,
        };
        use core::cmp::Ordering::*;
        assert_eq!(compare_fitness(&mk(66.6, 0.0, 5), &mk(6.2, 1.0, 1)), Less);
        assert_eq!(compare_fitness(&mk(1.0, 0.5, 5), &mk(1.0, 0.4, 1)), Less);
        assert_eq!(compare_fitness(&mk(1.0, 0.5, 3), &mk(1.0, 0.5, 9)), Less);
        assert_eq!(compare_fitness(&mk(1.0, 0.5, 3), &mk(1.0, 0.5, 3)), Equal);
        assert_eq!(compare_fitness(&mk(6.2, 1.0, 1), &mk(66.6, 0.0, 5)), Greater);
    }

    #[test]
    fn comparison_is_a_total_order_on_random_reports() {
        let mut rng = DetRng::new(11);
        let mut reports = Vec::new();
        for _ in 0..40 {
            let fitness = [MIN_FITNESS, -100.0, 0.0, 66.6][rng.below(4)];
            let success = [0.0, 0.25, 0.5][rng.below(3)];
            let complexity = 1 + rng.below(5);
            reports.push(FitnessReport {
                fitness,
                episode_rewards: Vec::new(),
                success_rate: success,
                episodes: 0,
                seeds: Vec::new(),
                failure_stats: StatAccumulator::default().finish(),
                metrics: Some(InterpretabilityMetrics {
                    lines_of_code: 1,
                    cyclomatic_complexity: complexity,
                    max_nesting_depth: 0,
                }),
                evaluation_error: None,
            });
        }
        use core::cmp::Ordering;
        for a in &reports {
            assert_eq!(compare_fitness(a, a), Ordering::Equal);
            for b in &reports {
                let ab = compare_fitness(a, b);
                assert_eq!(compare_fitness(b, a), ab.reverse(), "antisymmetry");
                for c in &reports {
                    let bc = compare_fitness(b, c);
                    if ab == bc {
                        assert_eq!(compare_fitness(a, c), ab, "transitivity");
                    }
                }
            }
        }
    }

    #[test]
    fn report_line_record_has_fixed_fields() {
        let ast = parse_text("if vy < -0.5: return 2\nreturn 0").unwrap();
        let report = evaluate_policy(&cfg(), &ast, &seeds(3), 1000);
        let line = report.to_line();
        assert!(!line.contains('\n'));
        for field in [
            "fitness=", "success_rate=", "episodes=3", "seeds=", "rewards=", "crash_count=",
            "landed_count=", "timeout_count=", "out_of_bounds_count=", "mean_touchdown_vy=",
            "mean_final_abs_x=", "mean_fuel_used=", "mean_episode_length=", "loc=",
            "complexity=", "depth=", "error=-",
        ] {
            assert!(line.contains(field), "missing `{field}` in {line}");
        }
        assert_eq!(line.split(' ').count(), 17, "one token per field: {line}");

        let bad = evaluate_policy(&cfg(), &parse_text("return 9").unwrap(), &seeds(3), 1000);
        let bad_line = bad.to_line();
        assert!(bad_line.contains("error=episode_0_step_0"), "{bad_line}");
        assert_eq!(bad_line.split(' ').count(), 17);
    }

    #[test]
    fn min_fitness_sits_below_adversarial_policies() {
        // Constant-burn policies probe the worst reachable totals: climbs,
        // spins and drifts all stay above the sentinel.
        let c = cfg();
        for text in ["return 2", "return 1", "return 3", "if y > 0.1: return 1\nreturn 2"] {
            let ast = parse_text(text).unwrap();
            let report = evaluate_policy(&c, &ast, &seeds(20), c.max_steps);
            assert!(report.evaluation_error.is_none());
            for r in &report.episode_rewards {
                assert!(*r > MIN_FITNESS, "{text}: episode total {r} at or below sentinel");
            }
        }
    }
}
