//! Prompt and backend layer.
//!
//! Rendering turns versioned template files plus bindings into
//! `PromptRequest`s; `extract` pulls code and rationale out of raw response
//! text; `OperatorBackend` abstracts over who answers a prompt. The live
//! HTTP client implements the trait in the CLI crate; [`mock::MockBackend`]
//! answers offline with deterministic AST-level edits so full evolution
//! runs are a pure function of their seeds.

pub mod extract;
pub mod mock;
pub mod template;

pub use extract::{Extraction, extract};
pub use mock::{MockBackend, mock_evolve};
pub use template::{RenderError, RequestParams, TEMPLATE_VERSION, render};

use alloc::string::String;
use alloc::vec::Vec;

use crate::lang::PolicySource;

/// One prompt template per evolution operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Init,
    FunSearchContinue,
    EohInit,
    EohExplore,
    EohGuidedCrossover,
    EohStructMutate,
    EohParamMutate,
    EvoEngineerRefine,
    MockMutate,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 9] = [
        OperatorKind::Init,
        OperatorKind::FunSearchContinue,
        OperatorKind::EohInit,
        OperatorKind::EohExplore,
        OperatorKind::EohGuidedCrossover,
        OperatorKind::EohStructMutate,
        OperatorKind::EohParamMutate,
        OperatorKind::EvoEngineerRefine,
        OperatorKind::MockMutate,
    ];

    pub fn template_id(self) -> &'static str {
        match self {
            OperatorKind::Init => "init",
            OperatorKind::FunSearchContinue => "funsearch_continue",
            OperatorKind::EohInit => "eoh_init",
            OperatorKind::EohExplore => "eoh_explore",
            OperatorKind::EohGuidedCrossover => "eoh_guided_crossover",
            OperatorKind::EohStructMutate => "eoh_struct_mutate",
            OperatorKind::EohParamMutate => "eoh_param_mutate",
            OperatorKind::EvoEngineerRefine => "evoengineer_refine",
            OperatorKind::MockMutate => "mock_mutate",
        }
    }

    /// How many parents the operator's prompt consumes.
    pub fn parent_count(self) -> usize {
        match self {
            OperatorKind::Init | OperatorKind::EohInit => 0,
            OperatorKind::FunSearchContinue => 2,
            OperatorKind::EohGuidedCrossover => 2,
            _ => 1,
        }
    }
}

/// A fully rendered request, ready for any chat-completion endpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct PromptRequest {
    pub template_id: OperatorKind,
    pub system_text: String,
    pub user_text: String,
    pub temperature: f64,
    pub model_name: String,
    pub max_response_tokens: u32,
}

/// What came back for one request.
#[derive(Clone, Debug, PartialEq)]
pub struct LlmResponse {
    pub raw_text: String,
    /// Present only when a fenced code block was found in `raw_text`.
    pub extracted_code: Option<PolicySource>,
    pub extracted_rationale: Option<String>,
    pub prompt_tokens: u32,
    pub completion_tokens: u32,
    pub latency: core::time::Duration,
}

/// Transport-level failure after the backend's own retry policy ran out.
#[derive(Clone, Debug, PartialEq)]
pub enum BackendError {
    Transport { detail: String, attempts: u32 },
    Auth { detail: String },
    MalformedResponse { detail: String },
}

impl core::fmt::Display for BackendError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BackendError::Transport { detail, attempts } => {
                write!(f, "transport failed after {attempts} attempt(s): {detail}")
            }
            BackendError::Auth { detail } => write!(f, "authentication failed: {detail}"),
            BackendError::MalformedResponse { detail } => {
                write!(f, "malformed response: {detail}")
            }
        }
    }
}

/// A parent program as the backend sees it: canonical source plus fitness.
#[derive(Clone, Debug, PartialEq)]
pub struct ParentSnapshot {
    pub source: String,
    pub fitness: f64,
}

/// One dispatched operator call. The rendered prompt is everything a live
/// endpoint needs; the structured fields mirror the prompt's content so the
/// offline mock can transform parents at the AST level instead of parsing
/// its own prompt back.
#[derive(Clone, Debug)]
pub struct BackendRequest<'a> {
    pub prompt: &'a PromptRequest,
    pub operator: OperatorKind,
    pub parents: &'a [ParentSnapshot],
    /// Deterministic per-call seed derived by the engine.
    pub call_seed: u64,
    /// Generation the call belongs to (0 = initialization).
    pub generation: u32,
}

/// Anything that can answer operator calls: the live HTTP gateway, the
/// deterministic mock, or a test double.
pub trait OperatorBackend {
    fn complete(&mut self, request: &BackendRequest<'_>) -> Result<LlmResponse, BackendError>;
}

impl OperatorBackend for &mut (dyn OperatorBackend + '_) {
    fn complete(&mut self, request: &BackendRequest<'_>) -> Result<LlmResponse, BackendError> {
        (**self).complete(request)
    }
}

/// Record of one call as seen by a [`RecordingBackend`].
#[derive(Clone, Debug)]
pub struct RecordedCall {
    pub prompt: PromptRequest,
    pub operator: OperatorKind,
    pub parents: Vec<ParentSnapshot>,
    pub generation: u32,
    pub raw_response: Option<String>,
    pub error: Option<String>,
}

/// Wraps any backend and keeps a transcript of every call.
pub struct RecordingBackend<B> {
    pub inner: B,
    pub calls: Vec<RecordedCall>,
}

impl<B> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        RecordingBackend { inner, calls: Vec::new() }
    }
}

impl<B: OperatorBackend> OperatorBackend for RecordingBackend<B> {
    fn complete(&mut self, request: &BackendRequest<'_>) -> Result<LlmResponse, BackendError> {
        let result = self.inner.complete(request);
        self.calls.push(RecordedCall {
            prompt: request.prompt.clone(),
            operator: request.operator,
            parents: request.parents.to_vec(),
            generation: request.generation,
            raw_response: result.as_ref().ok().map(|r| r.raw_text.clone()),
            error: result.as_ref().err().map(|e| alloc::format!("{e}")),
        });
        result
    }
}

/// Test double that replays canned raw responses in order, then errors.
pub struct ScriptedBackend {
    responses: Vec<String>,
    next: usize,
}

impl ScriptedBackend {
    pub fn new(responses: Vec<String>) -> Self {
        ScriptedBackend { responses, next: 0 }
    }
}

impl OperatorBackend for ScriptedBackend {
    fn complete(&mut self, _request: &BackendRequest<'_>) -> Result<LlmResponse, BackendError> {
        let Some(raw) = self.responses.get(self.next) else {
            return Err(BackendError::Transport {
                detail: String::from("script exhausted"),
                attempts: 1,
            });
        };
        self.next += 1;
        Ok(extract::to_response(raw.clone(), crate::lang::SourceOrigin::LlmGenerated))
    }
}
