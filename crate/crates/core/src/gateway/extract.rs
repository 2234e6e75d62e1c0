//! Pulls code and rationale out of raw response text.
//!
//! Total over arbitrary strings; absence of a section is a value, never an
//! error, and nothing is ever repaired or fabricated.

use alloc::string::String;
use alloc::vec::Vec;

use super::LlmResponse;
use crate::lang::{PolicySource, SourceOrigin};

#[derive(Clone, Debug, PartialEq)]
pub struct Extraction {
    /// Content of the first fenced code block, if any.
    pub code: Option<String>,
    /// Text of a `RATIONALE:` headed section, if any.
    pub rationale: Option<String>,
    /// Fenced blocks beyond the first; callers log, never use them.
    pub extra_code_blocks: usize,
}

/// Finds the first ```-fenced block (any info string) and a `RATIONALE:`
/// section. An unterminated fence yields no code.
pub fn extract(raw_text: &str) -> Extraction {
    let lines: Vec<&str> = raw_text.lines().collect();
    let mut code: Option<String> = None;
    let mut extra_code_blocks = 0;
    let mut i = 0;
    while i < lines.len() {
        if lines[i].trim_start().starts_with("```") {
            let mut body = String::new();
            let mut closed = false;
            let mut j = i + 1;
            while j < lines.len() {
                if lines[j].trim_start().starts_with("```") {
                    closed = true;
                    break;
                }
                body.push_str(lines[j]);
                body.push('\n');
                j += 1;
            }
            if closed {
                if code.is_none() {
                    code = Some(body);
                } else {
                    extra_code_blocks += 1;
                }
                i = j + 1;
                continue;
            } else {
                break;
            }
        }
        i += 1;
    }

    let rationale = extract_rationale(&lines);
    Extraction { code, rationale, extra_code_blocks }
}

fn extract_rationale(lines: &[&str]) -> Option<String> {
    let start = lines.iter().position(|l| l.trim_start().starts_with("RATIONALE:"))?;
    let mut text = String::new();
    let first = lines[start].trim_start().trim_start_matches("RATIONALE:").trim();
    if !first.is_empty() {
        text.push_str(first);
    }
    for line in &lines[start + 1..] {
        let t = line.trim();
        if t.is_empty() || t.starts_with("```") {
            break;
        }
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(t);
    }
    if text.is_empty() { None } else { Some(text) }
}

/// Builds an `LlmResponse` around raw text, running extraction. Token
/// counts are rough length-based estimates when the transport reports none.
pub fn to_response(raw_text: String, origin: SourceOrigin) -> LlmResponse {
    let extraction = extract(&raw_text);
    LlmResponse {
        extracted_code: extraction.code.map(|c| PolicySource::new(c, origin)),
        extracted_rationale: extraction.rationale,
        prompt_tokens: 0,
        completion_tokens: (raw_text.len() / 4) as u32,
        latency: core::time::Duration::ZERO,
        raw_text,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_fenced_block() {
        let e = extract("Here you go:\n```\nreturn 0\n```\nGood luck!");
        assert_eq!(e.code.as_deref(), Some("return 0\n"));
        assert_eq!(e.extra_code_blocks, 0);
        assert_eq!(e.rationale, None);
    }

    #[test]
    fn info_string_is_ignored() {
        let e = extract("```python\nreturn 2\n```");
        assert_eq!(e.code.as_deref(), Some("return 2\n"));
    }

    #[test]
    fn no_block_means_no_code() {
        let e = extract("I think the policy should fire the main engine more.");
        assert_eq!(e.code, None);
    }

    #[test]
    fn unterminated_fence_means_no_code() {
        let e = extract("```\nreturn 0");
        assert_eq!(e.code, None);
    }

    #[test]
    fn first_of_two_blocks_wins() {
        let e = extract("```\nreturn 1\n```\ntext\n```\nreturn 2\n```");
        assert_eq!(e.code.as_deref(), Some("return 1\n"));
        assert_eq!(e.extra_code_blocks, 1);
    }

    #[test]
    fn rationale_section_is_captured() {
        let raw = "RATIONALE: Brakes too late.\nEarlier braking helps.\n\n```\nreturn 2\n```";
        let e = extract(raw);
        assert_eq!(e.rationale.as_deref(), Some("Brakes too late. Earlier braking helps."));
        assert_eq!(e.code.as_deref(), Some("return 2\n"));
    }

    #[test]
    fn total_over_arbitrary_text() {
        for raw in ["", "````````", "RATIONALE:", "```\n```", "\u{0}\u{1}weird\u{7f}"] {
            let _ = extract(raw);
        }
    }
}
