//! The policy DSL: a restricted, loop-free language for control policies.
//!
//! Programs map the 8 lander state variables to a discrete action. The
//! surface syntax is near-Python (`if/elif/else`, `return`, `let`, `#`
//! comments) but newline- and indentation-insensitive: multi-statement
//! bodies are brace-delimited, single-statement bodies may sit inline after
//! the colon. There are no loops, no user functions and only three
//! intrinsics (`abs`, `min`, `max`), so termination is structural and
//! sandboxing is a property of the language.
//!
//! The grammar is published in `docs/policy-dsl.md`.

mod ast;
mod eval;
mod generate;
mod lexer;
mod metrics;
mod parser;
mod print;

pub use ast::{BinaryOp, Expr, IfArm, Intrinsic, PolicyAst, Stmt, UnaryOp, neg};
pub use eval::{DEFAULT_EVAL_BUDGET, EvalError, evaluate};
pub use generate::{GenLimits, random_program, seed_policy};
pub use metrics::{InterpretabilityMetrics, measure};
pub use parser::{Diagnostic, LangError, ValidationKind, parse, parse_text};
pub use print::pretty_print;

use alloc::string::String;

/// DSL names of the state components, in `LanderState::as_array` order.
pub const STATE_VAR_NAMES: [&str; 8] =
    ["x", "y", "vx", "vy", "angle", "w", "left_leg", "right_leg"];

pub(crate) fn state_var_index(name: &str) -> Option<usize> {
    STATE_VAR_NAMES.iter().position(|n| *n == name)
}

/// Where a program text came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceOrigin {
    Seed,
    LlmGenerated,
    MockGenerated,
    Fixture,
}

impl SourceOrigin {
    pub fn label(self) -> &'static str {
        match self {
            SourceOrigin::Seed => "seed",
            SourceOrigin::LlmGenerated => "llm",
            SourceOrigin::MockGenerated => "mock",
            SourceOrigin::Fixture => "fixture",
        }
    }
}

/// A policy program as raw text plus provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicySource {
    pub text: String,
    pub origin: SourceOrigin,
}

impl PolicySource {
    pub fn new(text: impl Into<String>, origin: SourceOrigin) -> Self {
        PolicySource { text: text.into(), origin }
    }
}
