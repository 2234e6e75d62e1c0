//! The evolution loop and its building blocks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::config::EvolutionConfig;
use super::log::{EvolutionRunLog, GenerationRecord};
use crate::fitness::{FitnessReport, compare_fitness, evaluate_policy};
use crate::gateway::{
    BackendError, BackendRequest, OperatorBackend, OperatorKind, ParentSnapshot, RequestParams,
    TEMPLATE_VERSION, render,
};
use crate::lang::{PolicyAst, PolicySource, SourceOrigin, parse_text, pretty_print};
use crate::rng::DetRng;
use crate::sim::SimConfig;

/// One candidate program and its bookkeeping.
#[derive(Clone, Debug)]
pub struct Individual {
    pub id: u64,
    /// Canonical source text (pretty-printed form of `ast`).
    pub source: PolicySource,
    pub ast: PolicyAst,
    /// Present after the generation's evaluate phase.
    pub report: Option<FitnessReport>,
    pub generation_born: u32,
    pub parent_ids: Vec<u64>,
    pub operator_used: OperatorKind,
}

impl Individual {
    fn fitness(&self) -> f64 {
        self.report.as_ref().expect("individual evaluated").fitness
    }
}

#[derive(Clone, Debug)]
pub struct Population {
    pub individuals: Vec<Individual>,
    pub capacity: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EngineError {
    Config(String),
    /// Even the trivial-program fallback failed; indicates a broken build.
    InitExhausted,
    /// The backend refused in a way that retries cannot fix.
    Backend(BackendError),
}

impl core::fmt::Display for EngineError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EngineError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            EngineError::InitExhausted => write!(f, "could not build an initial population"),
            EngineError::Backend(e) => write!(f, "backend failure: {e}"),
        }
    }
}

/// Per-generation episode seed list, derived from the master seed; the same
/// list is shared by every individual within the generation and refreshed
/// each generation.
pub fn generation_seeds(master_seed: u64, generation: u32, count: usize) -> Vec<u64> {
    let mut rng = DetRng::derive(master_seed, 0x5EED_0000 + generation as u64);
    (0..count).map(|_| rng.next_u64()).collect()
}

/// Tournament selection: each call draws `tournament_size` distinct
/// entrants and keeps the best under `compare_fitness`; winners across
/// calls are selected with replacement. Returns population indices.
pub fn select_parents(
    pop: &Population,
    rng: &mut DetRng,
    count: usize,
    tournament_size: usize,
) -> Vec<usize> {
    let n = pop.individuals.len();
    assert!(n > 0, "cannot select from an empty population");
    let t = tournament_size.clamp(1, n);
    (0..count)
        .map(|_| {
            let entrants = rng.distinct_below(n, t);
            entrants
                .into_iter()
                .min_by(|&a, &b| {
                    compare_fitness(
                        pop.individuals[a].report.as_ref().expect("evaluated"),
                        pop.individuals[b].report.as_ref().expect("evaluated"),
                    )
                })
                .expect("non-empty tournament")
        })
        .collect()
}

/// Elitist truncation: pool parents and offspring, keep the top
/// `capacity` under `compare_fitness` (stable, so insertion order breaks
/// full ties). The pool's best always survives.
pub fn replace(pop: Population, offspring: Vec<Individual>) -> Population {
    let capacity = pop.capacity;
    let mut pool = pop.individuals;
    pool.extend(offspring);
    pool.sort_by(|a, b| {
        compare_fitness(
            a.report.as_ref().expect("evaluated"),
            b.report.as_ref().expect("evaluated"),
        )
    });
    pool.truncate(capacity);
    Population { individuals: pool, capacity }
}

/// Drives one full run against any backend.
pub struct Engine<'a, B: OperatorBackend> {
    config: &'a EvolutionConfig,
    sim: &'a SimConfig,
    backend: &'a mut B,
    next_id: u64,
    llm_calls: u32,
    init_discarded: u32,
}

struct Candidate {
    source: PolicySource,
    ast: PolicyAst,
    operator: OperatorKind,
    parent_ids: Vec<u64>,
}

impl<'a, B: OperatorBackend> Engine<'a, B> {
    pub fn new(
        config: &'a EvolutionConfig,
        sim: &'a SimConfig,
        backend: &'a mut B,
    ) -> Result<Self, EngineError> {
        config.validate().map_err(EngineError::Config)?;
        Ok(Engine { config, sim, backend, next_id: 0, llm_calls: 0, init_discarded: 0 })
    }

    pub fn llm_calls(&self) -> u32 {
        self.llm_calls
    }

    fn request_params(&self) -> RequestParams {
        RequestParams {
            temperature: self.config.temperature,
            model_name: self.config.model_name.clone(),
            max_response_tokens: self.config.max_response_tokens,
        }
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn budget_left(&self) -> u32 {
        self.config.llm_budget.saturating_sub(self.llm_calls)
    }

    /// Renders, dispatches and extracts one operator call. `None` means the
    /// call produced no usable candidate (extraction or parse failure, or a
    /// retryable backend error); only authentication failures abort.
    fn dispatch(
        &mut self,
        operator: OperatorKind,
        parents: &[ParentSnapshot],
        parent_ids: Vec<u64>,
        bindings: &BTreeMap<String, String>,
        generation: u32,
    ) -> Result<Option<Candidate>, EngineError> {
        debug_assert!(self.budget_left() > 0, "dispatch past budget");
        let prompt = render(operator, bindings, &self.request_params())
            .map_err(|e| EngineError::Config(format!("template rendering: {e}")))?;
        let call_seed = DetRng::derive(self.config.master_seed, 0xCA11_0000 + self.llm_calls as u64)
            .next_u64();
        // A dispatched request counts against the budget whether or not it
        // ultimately yields a candidate.
        self.llm_calls += 1;
        let response = match self.backend.complete(&BackendRequest {
            prompt: &prompt,
            operator,
            parents,
            call_seed,
            generation,
        }) {
            Ok(r) => r,
            Err(BackendError::Auth { detail }) => {
                return Err(EngineError::Backend(BackendError::Auth { detail }));
            }
            Err(_) => return Ok(None),
        };
        if operator == OperatorKind::EvoEngineerRefine && response.extracted_rationale.is_none() {
            return Ok(None);
        }
        let Some(code) = response.extracted_code else {
            return Ok(None);
        };
        let Ok(ast) = parse_text(&code.text) else {
            return Ok(None);
        };
        let canonical = pretty_print(&ast);
        Ok(Some(Candidate {
            source: PolicySource::new(canonical, code.origin),
            ast,
            operator,
            parent_ids,
        }))
    }

    fn trivial_individual(&mut self, generation: u32) -> Individual {
        let ast = parse_text("return 0").expect("trivial program parses");
        Individual {
            id: self.fresh_id(),
            source: PolicySource::new(pretty_print(&ast), SourceOrigin::Seed),
            ast,
            report: None,
            generation_born: generation,
            parent_ids: Vec::new(),
            operator_used: OperatorKind::Init,
        }
    }

    /// Builds the initial population. Strategies with LLM initialization
    /// request candidates until `population_size` distinct valid programs
    /// arrive or the retry cap / budget runs out; remaining slots are
    /// filled with the trivial program so the run can proceed.
    pub fn initialize(&mut self) -> Result<Population, EngineError> {
        let n = self.config.population_size;
        let mut individuals: Vec<Individual> = Vec::with_capacity(n);
        if self.config.strategy.llm_initialization() {
            let max_attempts = n as u32 + self.config.init_retry_cap;
            let mut attempts = 0u32;
            let mut seen: Vec<String> = Vec::new();
            while individuals.len() < n && attempts < max_attempts && self.budget_left() > 0 {
                attempts += 1;
                let mut bindings = BTreeMap::new();
                bindings.insert("attempt".to_string(), attempts.to_string());
                bindings.insert("population_size".to_string(), n.to_string());
                match self.dispatch(OperatorKind::Init, &[], Vec::new(), &bindings, 0)? {
                    Some(candidate) if !seen.contains(&candidate.source.text) => {
                        seen.push(candidate.source.text.clone());
                        individuals.push(Individual {
                            id: self.fresh_id(),
                            source: candidate.source,
                            ast: candidate.ast,
                            report: None,
                            generation_born: 0,
                            parent_ids: Vec::new(),
                            operator_used: OperatorKind::Init,
                        });
                    }
                    _ => self.init_discarded += 1,
                }
            }
        }
        while individuals.len() < n {
            let ind = self.trivial_individual(0);
            individuals.push(ind);
        }
        if individuals.len() != n {
            return Err(EngineError::InitExhausted);
        }
        Ok(Population { individuals, capacity: n })
    }

    /// Evaluates every individual on this generation's seed list.
    /// Duplicate canonical forms share one cached report.
    fn evaluate_population(&self, individuals: &mut [Individual], seeds: &[u64]) {
        let mut cache: BTreeMap<String, FitnessReport> = BTreeMap::new();
        for ind in individuals.iter_mut() {
            let report = cache
                .entry(ind.source.text.clone())
                .or_insert_with(|| {
                    evaluate_policy(self.sim, &ind.ast, seeds, self.sim.max_steps)
                })
                .clone();
            ind.report = Some(report);
        }
    }

    /// One generation's worth of backend calls: plans operator slots,
    /// renders their prompts and collects parsed offspring. Stops early
    /// when the call budget runs out (a partial generation is fine).
    pub fn llm_evolve(
        &mut self,
        pop: &Population,
        generation: u32,
        best_so_far: f64,
        rng: &mut DetRng,
    ) -> Result<(Vec<Individual>, u32), EngineError> {
        let mut offspring = Vec::new();
        let mut discarded = 0u32;
        for &operator in self.config.strategy.operator_cycle() {
            if self.budget_left() == 0 {
                break;
            }
            let parent_indices =
                select_parents(pop, rng, operator.parent_count(), self.config.tournament_size);
            let mut parent_refs: Vec<&Individual> =
                parent_indices.iter().map(|&i| &pop.individuals[i]).collect();
            if operator == OperatorKind::FunSearchContinue {
                // Worst to best, the progression the prompt asks to extend.
                parent_refs.sort_by(|a, b| a.fitness().total_cmp(&b.fitness()));
            }
            let snapshots: Vec<ParentSnapshot> = parent_refs
                .iter()
                .map(|p| ParentSnapshot { source: p.source.text.clone(), fitness: p.fitness() })
                .collect();
            let parent_ids: Vec<u64> = parent_refs.iter().map(|p| p.id).collect();
            let bindings = self.operator_bindings(operator, &parent_refs, generation, best_so_far);
            match self.dispatch(operator, &snapshots, parent_ids, &bindings, generation)? {
                Some(candidate) => offspring.push(Individual {
                    id: self.fresh_id(),
                    source: candidate.source,
                    ast: candidate.ast,
                    report: None,
                    generation_born: generation,
                    parent_ids: candidate.parent_ids,
                    operator_used: candidate.operator,
                }),
                None => discarded += 1,
            }
        }
        Ok((offspring, discarded))
    }

    fn operator_bindings(
        &self,
        operator: OperatorKind,
        parents: &[&Individual],
        generation: u32,
        best_so_far: f64,
    ) -> BTreeMap<String, String> {
        let mut b = BTreeMap::new();
        match operator {
            OperatorKind::Init => {
                b.insert("attempt".to_string(), "1".to_string());
                b.insert("population_size".to_string(), self.config.population_size.to_string());
            }
            OperatorKind::FunSearchContinue => {
                let mut block = String::new();
                for (i, p) in parents.iter().enumerate() {
                    block.push_str(&format!(
                        "Program {} (fitness {}):\n\n{}\n",
                        i + 1,
                        p.fitness(),
                        p.source.text
                    ));
                }
                b.insert("episodes".to_string(), self.config.eval_episodes.to_string());
                b.insert("parents_block".to_string(), block);
            }
            OperatorKind::EohInit => {}
            OperatorKind::EohExplore
            | OperatorKind::EohStructMutate
            | OperatorKind::EohParamMutate
            | OperatorKind::MockMutate => {
                let p = parents[0];
                b.insert("parent_fitness".to_string(), format!("{}", p.fitness()));
                b.insert("parent_code".to_string(), p.source.text.clone());
            }
            OperatorKind::EohGuidedCrossover => {
                b.insert("parent_a_fitness".to_string(), format!("{}", parents[0].fitness()));
                b.insert("parent_a_code".to_string(), parents[0].source.text.clone());
                b.insert("parent_b_fitness".to_string(), format!("{}", parents[1].fitness()));
                b.insert("parent_b_code".to_string(), parents[1].source.text.clone());
            }
            OperatorKind::EvoEngineerRefine => {
                let p = parents[0];
                let report = p.report.as_ref().expect("evaluated");
                let mut stats = String::new();
                for (name, value) in report.failure_stats.to_key_values() {
                    stats.push_str(&format!("{name}={value}\n"));
                }
                if let Some(err) = &report.evaluation_error {
                    stats.push_str(&format!("evaluation_error={}\n", err.describe()));
                }
                let metrics = report.metrics.map_or_else(
                    || "unavailable".to_string(),
                    |m| {
                        format!(
                            "lines_of_code={} cyclomatic_complexity={} max_nesting_depth={}",
                            m.lines_of_code, m.cyclomatic_complexity, m.max_nesting_depth
                        )
                    },
                );
                b.insert("parent_fitness".to_string(), format!("{}", report.fitness));
                b.insert(
                    "parent_success_rate".to_string(),
                    format!("{}", report.success_rate),
                );
                b.insert("parent_code".to_string(), p.source.text.clone());
                b.insert("episodes".to_string(), self.config.eval_episodes.to_string());
                b.insert("failure_stats".to_string(), stats);
                b.insert("metrics".to_string(), metrics);
                b.insert("generation".to_string(), generation.to_string());
                b.insert("best_so_far".to_string(), format!("{best_so_far}"));
            }
        }
        b
    }

    /// Runs the whole loop: initialize, then `generations` rounds of
    /// evaluate / select / evolve / evaluate offspring / replace, stopping
    /// early when the budget is gone. Returns the run log.
    pub fn run(mut self) -> Result<EvolutionRunLog, EngineError> {
        let config = self.config;
        let mut select_rng = DetRng::derive(config.master_seed, 0x5E1E_C700);

        let mut pop = self.initialize()?;
        let seeds0 = generation_seeds(config.master_seed, 0, config.eval_episodes);
        self.evaluate_population(&mut pop.individuals, &seeds0);
        pop.individuals.sort_by(|a, b| {
            compare_fitness(a.report.as_ref().unwrap(), b.report.as_ref().unwrap())
        });
        let initial_best_fitness = pop.individuals[0].fitness();
        let initial_mean_fitness = mean_fitness(&pop.individuals);

        let mut best_so_far = initial_best_fitness;
        let mut records = Vec::new();
        let mut budget_exhausted = false;

        for generation in 1..=config.generations {
            if self.budget_left() == 0 {
                budget_exhausted = true;
                break;
            }
            let seeds = generation_seeds(config.master_seed, generation, config.eval_episodes);
            self.evaluate_population(&mut pop.individuals, &seeds);

            let (mut offspring, discarded) =
                self.llm_evolve(&pop, generation, best_so_far, &mut select_rng)?;
            self.evaluate_population(&mut offspring, &seeds);

            pop = replace(pop, offspring);

            let best = &pop.individuals[0];
            let best_fitness = best.fitness();
            best_so_far = best_so_far.max(best_fitness);
            records.push(GenerationRecord {
                generation,
                best_fitness,
                mean_fitness: mean_fitness(&pop.individuals),
                fitness_distribution: pop.individuals.iter().map(Individual::fitness).collect(),
                best_so_far,
                llm_calls: self.llm_calls,
                discarded,
                best_metrics: best
                    .report
                    .as_ref()
                    .and_then(|r| r.metrics)
                    .expect("valid individuals always measure"),
                best_source: best.source.text.clone(),
            });
        }

        let best = pop.individuals[0].clone();
        Ok(EvolutionRunLog {
            strategy: config.strategy,
            template_version: TEMPLATE_VERSION.to_string(),
            master_seed: config.master_seed,
            population_size: config.population_size,
            generations_configured: config.generations,
            eval_episodes: config.eval_episodes,
            llm_budget: config.llm_budget,
            initial_best_fitness,
            initial_mean_fitness,
            records,
            total_llm_calls: self.llm_calls,
            init_discarded: self.init_discarded,
            budget_exhausted,
            best,
        })
    }
}

fn mean_fitness(individuals: &[Individual]) -> f64 {
    if individuals.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in individuals {
        sum += i.fitness();
    }
    sum / individuals.len() as f64
}

/// Convenience entry point: one full run against the given backend.
pub fn run_evolution<B: OperatorBackend>(
    config: &EvolutionConfig,
    sim: &SimConfig,
    backend: &mut B,
) -> Result<EvolutionRunLog, EngineError> {
    Engine::new(config, sim, backend)?.run()
}
