//! Run parameters for the evolution loop.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::gateway::OperatorKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    FunSearch,
    Eoh,
    EvoEngineer,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::FunSearch => "funsearch",
            Strategy::Eoh => "eoh",
            Strategy::EvoEngineer => "evoengineer",
        }
    }

    pub fn from_label(s: &str) -> Option<Strategy> {
        match s {
            "funsearch" => Some(Strategy::FunSearch),
            "eoh" => Some(Strategy::Eoh),
            "evoengineer" => Some(Strategy::EvoEngineer),
            _ => None,
        }
    }

    /// Offspring slots per generation (EoH cycles five operators, the
    /// others dispatch three calls).
    pub fn offspring_per_generation(self) -> usize {
        match self {
            Strategy::Eoh => 5,
            _ => 3,
        }
    }

    /// The operator filling each offspring slot, in dispatch order.
    pub fn operator_cycle(self) -> &'static [OperatorKind] {
        match self {
            Strategy::FunSearch => &[
                OperatorKind::FunSearchContinue,
                OperatorKind::FunSearchContinue,
                OperatorKind::FunSearchContinue,
            ],
            Strategy::Eoh => &[
                OperatorKind::EohInit,
                OperatorKind::EohExplore,
                OperatorKind::EohGuidedCrossover,
                OperatorKind::EohStructMutate,
                OperatorKind::EohParamMutate,
            ],
            Strategy::EvoEngineer => &[
                OperatorKind::EvoEngineerRefine,
                OperatorKind::EvoEngineerRefine,
                OperatorKind::EvoEngineerRefine,
            ],
        }
    }

    /// Whether the initial population is requested from the backend. EoH
    /// bootstraps from trivial programs instead: fresh candidates keep
    /// entering through the initialization operator of its per-generation
    /// cycle, which is how its call budget maps onto whole generations.
    pub fn llm_initialization(self) -> bool {
        !matches!(self, Strategy::Eoh)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: u32,
    /// Episodes per fitness evaluation (the seed list length).
    pub eval_episodes: usize,
    pub strategy: Strategy,
    pub master_seed: u64,
    /// Cap on total backend calls, initialization included.
    pub llm_budget: u32,
    pub tournament_size: usize,
    /// Extra initialization attempts beyond the population size before the
    /// remaining slots fall back to trivial programs.
    pub init_retry_cap: u32,
    pub temperature: f64,
    pub model_name: String,
    pub max_response_tokens: u32,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 10,
            generations: 20,
            eval_episodes: 10,
            strategy: Strategy::EvoEngineer,
            master_seed: 0,
            llm_budget: 200,
            tournament_size: 3,
            init_retry_cap: 10,
            temperature: 0.7,
            model_name: "gpt-4o".to_string(),
            max_response_tokens: 768,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.population_size < 2 {
            return Err("population_size must be at least 2".to_string());
        }
        if self.generations < 1 {
            return Err("generations must be at least 1".to_string());
        }
        if self.eval_episodes < 1 {
            return Err("eval_episodes must be at least 1".to_string());
        }
        if (self.llm_budget as usize) < self.population_size {
            return Err("llm_budget must be at least the population size".to_string());
        }
        if self.tournament_size < 1 {
            return Err("tournament_size must be at least 1".to_string());
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err("temperature must be a finite non-negative number".to_string());
        }
        Ok(())
    }

    /// Flat key/value view with an `evo.` prefix, mirrored by `set_key`.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        alloc::vec![
            ("evo.population_size".to_string(), self.population_size.to_string()),
            ("evo.generations".to_string(), self.generations.to_string()),
            ("evo.eval_episodes".to_string(), self.eval_episodes.to_string()),
            ("evo.strategy".to_string(), self.strategy.label().to_string()),
            ("evo.master_seed".to_string(), self.master_seed.to_string()),
            ("evo.llm_budget".to_string(), self.llm_budget.to_string()),
            ("evo.tournament_size".to_string(), self.tournament_size.to_string()),
            ("evo.init_retry_cap".to_string(), self.init_retry_cap.to_string()),
            ("evo.temperature".to_string(), self.temperature.to_string()),
            ("evo.model_name".to_string(), self.model_name.clone()),
            ("evo.max_response_tokens".to_string(), self.max_response_tokens.to_string()),
        ]
    }

    pub fn set_key(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        let bad = |k: &str| alloc::format!("evo config key `{k}`: cannot parse `{v}`");
        match key {
            "evo.population_size" => self.population_size = v.parse().map_err(|_| bad(key))?,
            "evo.generations" => self.generations = v.parse().map_err(|_| bad(key))?,
            "evo.eval_episodes" => self.eval_episodes = v.parse().map_err(|_| bad(key))?,
            "evo.strategy" => {
                self.strategy = Strategy::from_label(v)
                    .ok_or_else(|| alloc::format!("unknown strategy `{v}`"))?;
            }
            "evo.master_seed" => self.master_seed = v.parse().map_err(|_| bad(key))?,
            "evo.llm_budget" => self.llm_budget = v.parse().map_err(|_| bad(key))?,
            "evo.tournament_size" => self.tournament_size = v.parse().map_err(|_| bad(key))?,
            "evo.init_retry_cap" => self.init_retry_cap = v.parse().map_err(|_| bad(key))?,
            "evo.temperature" => self.temperature = v.parse().map_err(|_| bad(key))?,
            "evo.model_name" => self.model_name = v.to_string(),
            "evo.max_response_tokens" => {
                self.max_response_tokens = v.parse().map_err(|_| bad(key))?;
            }
            _ => return Err(alloc::format!("unknown evo config key `{key}`")),
        }
        Ok(())
    }
}
