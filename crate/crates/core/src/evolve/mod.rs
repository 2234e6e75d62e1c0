//! Population-based policy evolution.
//!
//! One generation = evaluate everyone on this generation's seed list,
//! tournament-select parents, dispatch one backend call per offspring slot
//! using the active strategy's prompt templates, evaluate the offspring on
//! the same seeds, then elitist-truncate parents and offspring back to the
//! population size. Strategies differ only in which operators fill the
//! offspring slots and how their prompts are assembled:
//!
//! * FunSearch: each slot shows selected parents worst-to-best and asks
//!   for the next program in the improvement sequence (3 slots).
//! * EoH: one full cycle of its five operators per generation, namely
//!   initialization, exploration, guided crossover, structural mutation
//!   and parameter mutation (5 slots).
//! * EvoEngineer: each slot carries one parent plus its full fitness
//!   report, failure statistics and a fixed domain-hint block, and the
//!   response must contain a rationale and a code block (3 slots).

mod config;
mod engine;
mod log;

pub use config::{EvolutionConfig, Strategy};
pub use engine::{
    Engine, EngineError, Individual, Population, generation_seeds, replace, run_evolution,
    select_parents,
};
pub use log::{EvolutionRunLog, GenerationRecord, ParsedRunLog, parse_log};
