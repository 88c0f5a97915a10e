//! Inference backends: the deterministic rule mock and a chat-completion
//! HTTP client.

use std::fmt;
use std::time::Duration;

use serde::Deserialize;

use crate::classify::parse::{rule_mock_classify, rule_mock_type};
use crate::classify::ClassifierConfig;
use crate::prompt::{ClassifyMode, PromptRequest};

/// How a backend call failed. Transient failures are worth retrying,
/// permanent ones are not.
#[derive(Debug, Clone)]
pub enum BackendError {
    Transient(String),
    Permanent(String),
}

impl fmt::Display for BackendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendError::Transient(reason) => write!(f, "transient: {reason}"),
            BackendError::Permanent(reason) => write!(f, "permanent: {reason}"),
        }
    }
}

/// A completion source. Implementations get both the structured request and
/// the rendered prompt; the mock reads the former, the HTTP client sends the
/// latter.
pub trait InferenceBackend: Send + Sync {
    fn complete(
        &self,
        req: &PromptRequest,
        prompt: &str,
        cfg: &ClassifierConfig,
    ) -> Result<String, BackendError>;
}

/// Offline backend that answers from fixed rules. Never fails, never
/// touches the network.
pub struct RuleMockBackend;

impl InferenceBackend for RuleMockBackend {
    fn complete(
        &self,
        req: &PromptRequest,
        _prompt: &str,
        _cfg: &ClassifierConfig,
    ) -> Result<String, BackendError> {
        let answer = match req.mode {
            ClassifyMode::Binary => rule_mock_classify(&req.candidate, &req.context)
                .answer()
                .to_string(),
            ClassifyMode::Multiclass => rule_mock_type(&req.candidate, &req.context)
                .name()
                .to_string(),
        };
        Ok(answer)
    }
}

/// OpenAI-style chat-completion client. The base URL and key come from
/// `SECRETSIFT_API_BASE` / `SECRETSIFT_API_KEY`; neither value is ever
/// written to logs or error messages.
pub struct RemoteBackend {
    base_url: String,
    api_key: Option<String>,
}

impl fmt::Debug for RemoteBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemoteBackend")
            .field("base_url", &self.base_url)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

pub(crate) fn endpoint_url(base: &str) -> String {
    format!("{}/v1/chat/completions", base.trim_end_matches('/'))
}

pub(crate) fn max_tokens_for(max_answer_chars: usize) -> u32 {
    ((max_answer_chars / 4).max(1)) as u32
}

impl RemoteBackend {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Self {
        RemoteBackend {
            base_url: base_url.into(),
            api_key,
        }
    }

    /// Reads connection settings from the environment. The key is optional
    /// (local inference servers often run without auth); the base URL is not.
    pub fn from_env() -> Result<Self, String> {
        let base = std::env::var("SECRETSIFT_API_BASE")
            .map_err(|_| "SECRETSIFT_API_BASE is not set".to_string())?;
        let api_key = std::env::var("SECRETSIFT_API_KEY").ok();
        Ok(RemoteBackend::new(base, api_key))
    }
}

impl InferenceBackend for RemoteBackend {
    fn complete(
        &self,
        _req: &PromptRequest,
        prompt: &str,
        cfg: &ClassifierConfig,
    ) -> Result<String, BackendError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(cfg.request_timeout_ms)))
            .build()
            .into();

        let body = serde_json::json!({
            "model": cfg.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": cfg.temperature,
            "max_tokens": max_tokens_for(cfg.max_answer_chars),
        });

        let mut request = agent.post(endpoint_url(&self.base_url));
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", format!("Bearer {key}"));
        }

        let mut response = request.send_json(&body).map_err(|e| match e {
            ureq::Error::StatusCode(code) if code == 429 || code >= 500 => {
                BackendError::Transient(format!("http status {code}"))
            }
            ureq::Error::StatusCode(code) => {
                BackendError::Permanent(format!("http status {code}"))
            }
            other => BackendError::Transient(format!("transport: {other}")),
        })?;

        let parsed: ChatResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Permanent(format!("malformed response body: {e}")))?;
        let first = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| BackendError::Permanent("response had no choices".into()))?;
        Ok(first.message.content)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::Label;

    fn req(mode: ClassifyMode, candidate: &str, context: &str) -> PromptRequest {
        PromptRequest {
            mode,
            shots: 0,
            candidate: candidate.into(),
            context: context.into(),
            exemplars: Vec::new(),
        }
    }

    #[test]
    fn mock_answers_are_canonical_strings() {
        let cfg = ClassifierConfig::default();
        let secret = RuleMockBackend
            .complete(
                &req(ClassifyMode::Binary, "q7B2mK9rT4wYbN1mZx3aF8kQ", ""),
                "",
                &cfg,
            )
            .unwrap();
        assert_eq!(secret, Label::Secret.answer());

        let benign = RuleMockBackend
            .complete(&req(ClassifyMode::Binary, "changeme123", ""), "", &cfg)
            .unwrap();
        assert_eq!(benign, Label::NonSensitive.answer());

        let typed = RuleMockBackend
            .complete(
                &req(
                    ClassifyMode::Multiclass,
                    "AKIAQ9R2V7XJ5WPLH3BD",
                    "aws_key = \"AKIAQ9R2V7XJ5WPLH3BD\"",
                ),
                "",
                &cfg,
            )
            .unwrap();
        assert_eq!(typed, "API Key and Secret");
    }

    #[test]
    fn endpoint_url_handles_trailing_slash() {
        assert_eq!(
            endpoint_url("http://127.0.0.1:8080"),
            "http://127.0.0.1:8080/v1/chat/completions"
        );
        assert_eq!(
            endpoint_url("http://127.0.0.1:8080/"),
            "http://127.0.0.1:8080/v1/chat/completions"
        );
    }

    #[test]
    fn max_tokens_scales_with_answer_budget() {
        assert_eq!(max_tokens_for(64), 16);
        assert_eq!(max_tokens_for(256), 64);
        // Tiny budgets still request at least one token.
        assert_eq!(max_tokens_for(1), 1);
    }

    #[test]
    fn debug_never_prints_the_key() {
        let backend = RemoteBackend::new(
            "http://127.0.0.1:9",
            Some("sk-very-secret-value-12345".into()),
        );
        let rendered = format!("{backend:?}");
        assert!(!rendered.contains("sk-very-secret-value-12345"));
        assert!(rendered.contains("redacted"));
    }
}
