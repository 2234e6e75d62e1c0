//! Run log records and their line-delimited text form.
//!
//! A run log file is one `run` header line, one `gen` line per generation,
//! and one final `summary` line. Fields are `key=value` pairs separated by
//! single spaces; the program source in a `gen` line is the final field
//! with newlines and backslashes escaped, so every record is one line.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::config::Strategy;
use super::engine::Individual;
use crate::lang::InterpretabilityMetrics;

pub const LOG_SCHEMA: &str = "policyevo-log-v1";

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationRecord {
    pub generation: u32,
    /// Best fitness in the population on this generation's seeds.
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Every individual's fitness, best first.
    pub fitness_distribution: Vec<f64>,
    /// Running maximum of `best_fitness`, seeded by the initial population.
    pub best_so_far: f64,
    /// Cumulative backend calls when the generation closed.
    pub llm_calls: u32,
    /// Candidates discarded this generation (unparseable or incomplete).
    pub discarded: u32,
    pub best_metrics: InterpretabilityMetrics,
    pub best_source: String,
}

fn escape(src: &str) -> String {
    let mut out = String::with_capacity(src.len());
    for ch in src.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(ch),
        }
    }
    out
}

fn unescape(src: &str) -> String {
    let mut out = String::with_capacity(src.len());
    let mut chars = src.chars();
    while let Some(ch) = chars.next() {
        if ch == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('\\') => out.push('\\'),
                Some(other) => {
                    out.push('\\');
                    out.push(other);
                }
                None => out.push('\\'),
            }
        } else {
            out.push(ch);
        }
    }
    out
}

fn join_floats(values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("{v}"));
    }
    out
}

impl GenerationRecord {
    pub fn to_line(&self) -> String {
        format!(
            "gen generation={} best_fitness={} mean_fitness={} best_so_far={} llm_calls={} \
             discarded={} dist={} loc={} complexity={} depth={} src={}",
            self.generation,
            self.best_fitness,
            self.mean_fitness,
            self.best_so_far,
            self.llm_calls,
            self.discarded,
            join_floats(&self.fitness_distribution),
            self.best_metrics.lines_of_code,
            self.best_metrics.cyclomatic_complexity,
            self.best_metrics.max_nesting_depth,
            escape(&self.best_source),
        )
    }

    pub fn from_line(line: &str) -> Result<GenerationRecord, String> {
        let rest = line.strip_prefix("gen ").ok_or("not a gen record")?;
        let (fields_part, src_part) =
            rest.split_once(" src=").ok_or("gen record missing src field")?;
        let fields = parse_fields(fields_part)?;
        let get = |k: &str| fields.get(k).ok_or_else(|| format!("missing field `{k}`"));
        let dist_text = get("dist")?;
        let fitness_distribution = if dist_text.is_empty() {
            Vec::new()
        } else {
            dist_text
                .split(',')
                .map(|s| s.parse::<f64>().map_err(|_| format!("bad dist value `{s}`")))
                .collect::<Result<Vec<f64>, String>>()?
        };
        Ok(GenerationRecord {
            generation: parse_num(get("generation")?)?,
            best_fitness: parse_num(get("best_fitness")?)?,
            mean_fitness: parse_num(get("mean_fitness")?)?,
            fitness_distribution,
            best_so_far: parse_num(get("best_so_far")?)?,
            llm_calls: parse_num(get("llm_calls")?)?,
            discarded: parse_num(get("discarded")?)?,
            best_metrics: InterpretabilityMetrics {
                lines_of_code: parse_num(get("loc")?)?,
                cyclomatic_complexity: parse_num(get("complexity")?)?,
                max_nesting_depth: parse_num(get("depth")?)?,
            },
            best_source: unescape(src_part),
        })
    }
}

fn parse_fields(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for pair in text.split(' ') {
        if pair.is_empty() {
            continue;
        }
        let (k, v) = pair.split_once('=').ok_or_else(|| format!("malformed field `{pair}`"))?;
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

fn parse_num<T: core::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse::<T>().map_err(|_| format!("cannot parse `{s}`"))
}

/// Everything a finished run reports.
#[derive(Clone, Debug)]
pub struct EvolutionRunLog {
    pub strategy: Strategy,
    pub template_version: String,
    pub master_seed: u64,
    pub population_size: usize,
    pub generations_configured: u32,
    pub eval_episodes: usize,
    pub llm_budget: u32,
    pub initial_best_fitness: f64,
    pub initial_mean_fitness: f64,
    pub records: Vec<GenerationRecord>,
    pub total_llm_calls: u32,
    pub init_discarded: u32,
    pub budget_exhausted: bool,
    /// Best individual of the final population, with its report.
    pub best: Individual,
}

impl EvolutionRunLog {
    pub fn final_best_fitness(&self) -> f64 {
        self.records.last().map_or(self.initial_best_fitness, |r| r.best_so_far)
    }

    /// Full line-delimited text: header, one line per generation, summary.
    pub fn to_log_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "run schema={} template_version={} strategy={} master_seed={} population_size={} \
             generations={} eval_episodes={} llm_budget={} initial_best={} initial_mean={}\n",
            LOG_SCHEMA,
            self.template_version,
            self.strategy.label(),
            self.master_seed,
            self.population_size,
            self.generations_configured,
            self.eval_episodes,
            self.llm_budget,
            self.initial_best_fitness,
            self.initial_mean_fitness,
        ));
        for record in &self.records {
            out.push_str(&record.to_line());
            out.push('\n');
        }
        let report = self.best.report.as_ref();
        out.push_str(&format!(
            "summary best_fitness={} best_so_far={} success_rate={} llm_calls={} \
             init_discarded={} budget_exhausted={} generations_completed={} loc={} complexity={}\n",
            report.map_or(f64::NAN, |r| r.fitness),
            self.final_best_fitness(),
            report.map_or(0.0, |r| r.success_rate),
            self.total_llm_calls,
            self.init_discarded,
            self.budget_exhausted,
            self.records.len(),
            report.and_then(|r| r.metrics).map_or(0, |m| m.lines_of_code),
            report.and_then(|r| r.metrics).map_or(0, |m| m.cyclomatic_complexity),
        ));
        out
    }
}

/// A run log read back from text, for reporting.
#[derive(Clone, Debug)]
pub struct ParsedRunLog {
    pub strategy: String,
    pub master_seed: u64,
    pub initial_best_fitness: f64,
    pub records: Vec<GenerationRecord>,
    pub summary: BTreeMap<String, String>,
}

/// Parses a full log text. Logs written under a different schema version
/// are a `SchemaMismatch` error.
pub fn parse_log(text: &str) -> Result<ParsedRunLog, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty log")?;
    let header_rest = header.strip_prefix("run ").ok_or("missing run header")?;
    let header_fields = parse_fields(header_rest)?;
    let schema = header_fields.get("schema").map(String::as_str).unwrap_or("");
    if schema != LOG_SCHEMA {
        return Err(format!("SchemaMismatch: log schema `{schema}`, expected `{LOG_SCHEMA}`"));
    }
    let mut records = Vec::new();
    let mut summary = BTreeMap::new();
    for line in lines {
        if line.starts_with("gen ") {
            records.push(GenerationRecord::from_line(line)?);
        } else if let Some(rest) = line.strip_prefix("summary ") {
            summary = parse_fields(rest)?;
        } else if !line.trim().is_empty() {
            return Err(format!("unrecognized log line: `{line}`"));
        }
    }
    Ok(ParsedRunLog {
        strategy: header_fields.get("strategy").cloned().unwrap_or_default(),
        master_seed: header_fields
            .get("master_seed")
            .and_then(|s| s.parse().ok())
            .unwrap_or_default(),
        initial_best_fitness: header_fields
            .get("initial_best")
            .and_then(|s| s.parse().ok())
            .unwrap_or(f64::NAN),
        records,
        summary,
    })
}
