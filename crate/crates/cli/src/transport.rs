//! Live chat-completion backend over HTTP.
//!
//! Wire shape: `{model, messages[{role, content}], temperature, max_tokens}`
//! in, `choices[0].message.content` out, compatible with common hosted and
//! local endpoints. Transient failures (network, 429, 5xx) retry with
//! exponential backoff; auth failures never retry. One dispatched request
//! counts as one logical call no matter how many attempts it took.

use std::time::{Duration, Instant};

use policyevo_core::gateway::{
    BackendError, BackendRequest, LlmResponse, OperatorBackend, extract,
};
use policyevo_core::lang::SourceOrigin;
use serde_json::{Value, json};

use crate::config::EndpointConfig;

/// Minimal HTTP surface, injectable for tests.
pub trait HttpExec {
    fn post_json(
        &mut self,
        url: &str,
        bearer: &str,
        body: &str,
        timeout_secs: u64,
    ) -> Result<HttpReply, String>;
}

pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

/// Real execution via ureq.
pub struct UreqExec;

impl HttpExec for UreqExec {
    fn post_json(
        &mut self,
        url: &str,
        bearer: &str,
        body: &str,
        timeout_secs: u64,
    ) -> Result<HttpReply, String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(timeout_secs)))
            .build()
            .into();
        let result = agent
            .post(url)
            .header("Authorization", &format!("Bearer {bearer}"))
            .header("Content-Type", "application/json")
            .send(body);
        match result {
            Ok(mut response) => {
                let status = response.status().as_u16();
                let body = response
                    .body_mut()
                    .read_to_string()
                    .map_err(|e| format!("reading response body: {e}"))?;
                Ok(HttpReply { status, body })
            }
            Err(ureq::Error::StatusCode(code)) => Ok(HttpReply { status: code, body: String::new() }),
            Err(e) => Err(format!("{e}")),
        }
    }
}

/// `OperatorBackend` backed by a real endpoint.
pub struct LiveBackend<T: HttpExec> {
    exec: T,
    endpoint: EndpointConfig,
    api_key: String,
    /// Attempts used by each logical call, for the run transcript.
    pub attempts_log: Vec<u32>,
}

impl<T: HttpExec> LiveBackend<T> {
    pub fn new(exec: T, endpoint: EndpointConfig, api_key: String) -> Self {
        LiveBackend { exec, endpoint, api_key, attempts_log: Vec::new() }
    }

    fn backoff(&self, attempt: u32) {
        if self.endpoint.backoff_ms == 0 {
            return;
        }
        let ms = self.endpoint.backoff_ms.saturating_mul(1u64 << attempt.min(6));
        std::thread::sleep(Duration::from_millis(ms));
    }
}

fn parse_completion(body: &str) -> Result<(String, u32, u32), String> {
    let value: Value = serde_json::from_str(body).map_err(|e| format!("invalid JSON: {e}"))?;
    let content = value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or("missing choices[0].message.content")?
        .to_string();
    let prompt_tokens = value.pointer("/usage/prompt_tokens").and_then(Value::as_u64).unwrap_or(0);
    let completion_tokens =
        value.pointer("/usage/completion_tokens").and_then(Value::as_u64).unwrap_or(0);
    Ok((content, prompt_tokens as u32, completion_tokens as u32))
}

impl<T: HttpExec> OperatorBackend for LiveBackend<T> {
    fn complete(&mut self, request: &BackendRequest<'_>) -> Result<LlmResponse, BackendError> {
        let prompt = request.prompt;
        let body = json!({
            "model": prompt.model_name,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
            "temperature": prompt.temperature,
            "max_tokens": prompt.max_response_tokens,
        })
        .to_string();
        let url = self.endpoint.url();
        let started = Instant::now();

        let mut last_error = String::new();
        for attempt in 1..=self.endpoint.max_attempts.max(1) {
            let reply = self.exec.post_json(&url, &self.api_key, &body, self.endpoint.timeout_secs);
            match reply {
                Ok(reply) if (200..300).contains(&reply.status) => {
                    self.attempts_log.push(attempt);
                    let (content, prompt_tokens, completion_tokens) =
                        parse_completion(&reply.body).map_err(|detail| {
                            BackendError::MalformedResponse { detail }
                        })?;
                    let mut response = extract::to_response(content, SourceOrigin::LlmGenerated);
                    response.prompt_tokens = prompt_tokens;
                    response.completion_tokens = completion_tokens;
                    response.latency = started.elapsed();
                    return Ok(response);
                }
                Ok(reply) if reply.status == 401 || reply.status == 403 => {
                    self.attempts_log.push(attempt);
                    return Err(BackendError::Auth {
                        detail: format!("endpoint returned {}", reply.status),
                    });
                }
                Ok(reply) if reply.status == 429 || reply.status >= 500 => {
                    last_error = format!("endpoint returned {}", reply.status);
                }
                Ok(reply) => {
                    self.attempts_log.push(attempt);
                    return Err(BackendError::Transport {
                        detail: format!("endpoint returned {}: {}", reply.status, reply.body),
                        attempts: attempt,
                    });
                }
                Err(network) => last_error = network,
            }
            if attempt < self.endpoint.max_attempts {
                self.backoff(attempt - 1);
            }
        }
        let attempts = self.endpoint.max_attempts.max(1);
        self.attempts_log.push(attempts);
        Err(BackendError::Transport { detail: last_error, attempts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use policyevo_core::gateway::{OperatorKind, PromptRequest};

    struct ScriptedExec {
        replies: Vec<Result<(u16, String), String>>,
        calls: usize,
    }

    impl HttpExec for ScriptedExec {
        fn post_json(&mut self, _: &str, _: &str, _: &str, _: u64) -> Result<HttpReply, String> {
            let reply = self.replies.get(self.calls).cloned().unwrap_or(Ok((500, String::new())));
            self.calls += 1;
            reply.map(|(status, body)| HttpReply { status, body })
        }
    }

    fn prompt() -> PromptRequest {
        PromptRequest {
            template_id: OperatorKind::Init,
            system_text: "s".into(),
            user_text: "u".into(),
            temperature: 0.7,
            model_name: "gpt-4o".into(),
            max_response_tokens: 256,
        }
    }

    fn endpoint() -> EndpointConfig {
        EndpointConfig { backoff_ms: 0, ..EndpointConfig::default() }
    }

    fn call(backend: &mut LiveBackend<ScriptedExec>) -> Result<LlmResponse, BackendError> {
        let p = prompt();
        backend.complete(&BackendRequest {
            prompt: &p,
            operator: OperatorKind::Init,
            parents: &[],
            call_seed: 0,
            generation: 0,
        })
    }

    fn ok_body(text: &str) -> String {
        serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": text}}],
            "usage": {"prompt_tokens": 12, "completion_tokens": 5},
        })
        .to_string()
    }

    #[test]
    fn canned_body_flows_through_extraction() {
        let exec = ScriptedExec {
            replies: vec![Ok((200, ok_body("hi\n```\nreturn 0\n```")))],
            calls: 0,
        };
        let mut backend = LiveBackend::new(exec, endpoint(), "key".into());
        let response = call(&mut backend).unwrap();
        assert_eq!(response.raw_text, "hi\n```\nreturn 0\n```");
        assert_eq!(response.extracted_code.unwrap().text, "return 0\n");
        assert_eq!(response.prompt_tokens, 12);
        assert_eq!(backend.attempts_log, vec![1]);
    }

    #[test]
    fn two_failures_then_success_is_one_call_three_attempts() {
        let exec = ScriptedExec {
            replies: vec![
                Err("connection reset".into()),
                Ok((503, String::new())),
                Ok((200, ok_body("```\nreturn 1\n```"))),
            ],
            calls: 0,
        };
        let mut backend = LiveBackend::new(exec, endpoint(), "key".into());
        let response = call(&mut backend).unwrap();
        assert!(response.extracted_code.is_some());
        assert_eq!(backend.attempts_log, vec![3]);
    }

    #[test]
    fn auth_failures_do_not_retry() {
        let exec = ScriptedExec { replies: vec![Ok((401, String::new()))], calls: 0 };
        let mut backend = LiveBackend::new(exec, endpoint(), "key".into());
        match call(&mut backend) {
            Err(BackendError::Auth { .. }) => {}
            other => panic!("expected auth error, got {other:?}"),
        }
        assert_eq!(backend.attempts_log, vec![1]);
    }

    #[test]
    fn exhausted_retries_are_a_transport_error() {
        let exec = ScriptedExec { replies: vec![Err("down".into()); 5], calls: 0 };
        let mut backend = LiveBackend::new(exec, endpoint(), "key".into());
        match call(&mut backend) {
            Err(BackendError::Transport { attempts, .. }) => assert_eq!(attempts, 3),
            other => panic!("expected transport error, got {other:?}"),
        }
    }

    #[test]
    fn missing_content_is_malformed() {
        let exec = ScriptedExec { replies: vec![Ok((200, "{}".into()))], calls: 0 };
        let mut backend = LiveBackend::new(exec, endpoint(), "key".into());
        assert!(matches!(call(&mut backend), Err(BackendError::MalformedResponse { .. })));
    }

    #[test]
    fn client_errors_other_than_auth_fail_fast() {
        let exec = ScriptedExec { replies: vec![Ok((400, "bad request".into()))], calls: 0 };
        let mut backend = LiveBackend::new(exec, endpoint(), "key".into());
        match call(&mut backend) {
            Err(BackendError::Transport { attempts, .. }) => assert_eq!(attempts, 1),
            other => panic!("expected transport error, got {other:?}"),
        }
    }
}
