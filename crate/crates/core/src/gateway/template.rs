//! Prompt templates: versioned files with `{placeholder}` substitution.
//!
//! The template files live in the repo under `crates/core/templates/` and
//! are compiled in, so the rendered text for a given binding map never
//! depends on the filesystem. Values are spliced verbatim and never
//! re-scanned, which keeps program code safe to embed.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{OperatorKind, PromptRequest};

/// Bumped whenever any template file changes; recorded in run logs.
pub const TEMPLATE_VERSION: &str = "1";

const SYSTEM_TEXT: &str = include_str!("../../templates/system.txt");

fn user_template(id: OperatorKind) -> &'static str {
    match id {
        OperatorKind::Init => include_str!("../../templates/init.user.txt"),
        OperatorKind::FunSearchContinue => {
            include_str!("../../templates/funsearch_continue.user.txt")
        }
        OperatorKind::EohInit => include_str!("../../templates/eoh_init.user.txt"),
        OperatorKind::EohExplore => include_str!("../../templates/eoh_explore.user.txt"),
        OperatorKind::EohGuidedCrossover => {
            include_str!("../../templates/eoh_guided_crossover.user.txt")
        }
        OperatorKind::EohStructMutate => {
            include_str!("../../templates/eoh_struct_mutate.user.txt")
        }
        OperatorKind::EohParamMutate => {
            include_str!("../../templates/eoh_param_mutate.user.txt")
        }
        OperatorKind::EvoEngineerRefine => {
            include_str!("../../templates/evoengineer_refine.user.txt")
        }
        OperatorKind::MockMutate => include_str!("../../templates/mock_mutate.user.txt"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RenderError {
    MissingBinding { placeholder: String },
}

impl core::fmt::Display for RenderError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RenderError::MissingBinding { placeholder } => {
                write!(f, "missing binding for placeholder `{{{placeholder}}}`")
            }
        }
    }
}

/// Per-request knobs the engine copies out of its config.
#[derive(Clone, Debug, PartialEq)]
pub struct RequestParams {
    pub temperature: f64,
    pub model_name: String,
    pub max_response_tokens: u32,
}

/// Renders a template into a `PromptRequest`. Deterministic: same bindings,
/// same request. Every `{placeholder}` in the template must have a binding.
pub fn render(
    id: OperatorKind,
    bindings: &BTreeMap<String, String>,
    params: &RequestParams,
) -> Result<PromptRequest, RenderError> {
    Ok(PromptRequest {
        template_id: id,
        system_text: substitute(SYSTEM_TEXT, bindings)?,
        user_text: substitute(user_template(id), bindings)?,
        temperature: params.temperature,
        model_name: params.model_name.clone(),
        max_response_tokens: params.max_response_tokens,
    })
}

/// Single pass over the template text; substituted values are not
/// re-scanned. A `{name}` (lowercase identifier in braces) is a
/// placeholder; any other brace is literal text.
fn substitute(template: &str, bindings: &BTreeMap<String, String>) -> Result<String, RenderError> {
    let mut out = String::with_capacity(template.len());
    let bytes = template.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{'
            && let Some((name, end)) = placeholder_at(template, i)
        {
            match bindings.get(name) {
                Some(value) => out.push_str(value),
                None => {
                    return Err(RenderError::MissingBinding {
                        placeholder: String::from(name),
                    });
                }
            }
            i = end;
            continue;
        }
        // Advance one full character.
        let ch = template[i..].chars().next().expect("in bounds");
        out.push(ch);
        i += ch.len_utf8();
    }
    Ok(out)
}

/// Returns (name, index past `}`) when a placeholder starts at `start`.
fn placeholder_at(template: &str, start: usize) -> Option<(&str, usize)> {
    let rest = &template[start + 1..];
    let close = rest.find('}')?;
    let name = &rest[..close];
    if !name.is_empty()
        && name.bytes().all(|b| b.is_ascii_lowercase() || b == b'_')
    {
        Some((name, start + 1 + close + 1))
    } else {
        None
    }
}

/// The placeholders each operator's user template expects, in first-use
/// order. Used by tests to keep templates and binding builders in sync.
pub fn placeholders(id: OperatorKind) -> Vec<&'static str> {
    let template = user_template(id);
    let mut found = Vec::new();
    let mut i = 0;
    while i < template.len() {
        if template.as_bytes()[i] == b'{'
            && let Some((name, end)) = placeholder_at(template, i)
        {
            if !found.contains(&name) {
                found.push(name);
            }
            i = end;
            continue;
        }
        i += 1;
    }
    found
}
