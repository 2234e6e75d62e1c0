//! Core engine for evolving interpretable lander control policies.
//!
//! The crate is organized around five subsystems:
//!
//! * [`sim`]: a deterministic, seedable 2D lunar-lander environment
//!   (8-dimensional state, 4 discrete actions, shaped reward).
//! * [`lang`]: a small loop-free policy DSL with parser, bounded
//!   interpreter, canonical pretty-printer and interpretability metrics.
//!   Sandboxing is a language property: no loops, no user functions, three
//!   intrinsics.
//! * [`fitness`]: seeded-batch policy evaluation (mean episode reward),
//!   failure statistics and the total order used for selection.
//! * [`gateway`]: prompt templates, response extraction and backends via
//!   the `OperatorBackend` trait, with a deterministic offline mock and
//!   test doubles.
//! * [`evolve`]: the population loop: initialize, evaluate, tournament
//!   selection, strategy-specific offspring prompts, elitist replacement.
//!
//! Everything here is `no_std + alloc`; IO, file formats and the live HTTP
//! backend live in the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod evolve;
pub mod fitness;
pub mod gateway;
pub mod lang;
pub mod rng;
pub mod sim;
