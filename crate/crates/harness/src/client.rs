//! Model clients: the completion contract, offline stubs for testing,
//! and an HTTP adapter for chat-completions style endpoints.

use std::collections::HashMap;

use regex::Regex;
use serde_json::json;
use thiserror::Error;

use mwp_core::dataset::DatasetRecord;

/// Environment variable holding the API token for the HTTP client.
pub const API_TOKEN_ENV: &str = "MWP_API_TOKEN";

#[derive(Debug, Clone)]
pub struct CompletionRequest {
    pub prompt: String,
    pub max_tokens: usize,
    pub temperature: f64,
    /// Metadata for stub clients; never sent over the wire.
    pub problem_id: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CompletionResponse {
    pub text: String,
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("bad response: {0}")]
    BadResponse(String),
    #[error("configuration: {0}")]
    Config(String),
}

impl ClientError {
    /// Transport errors are retried; the rest are not.
    pub fn is_retryable(&self) -> bool {
        matches!(self, ClientError::Transport(_))
    }
}

/// Completion interface: request {prompt, max_tokens, temperature} to
/// response {text}.
pub trait ModelClient: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, ClientError>;

    fn describe(&self) -> String;

    /// Deterministic clients (the stubs) report zero latency so eval
    /// outputs stay byte-reproducible.
    fn is_deterministic(&self) -> bool {
        false
    }
}

/// Replays the gold chain of thought for each problem id; closes the
/// extraction loop with accuracy 1.0.
pub struct GoldEchoClient {
    answers: HashMap<String, String>,
}

impl GoldEchoClient {
    pub fn from_records(records: &[DatasetRecord]) -> Self {
        GoldEchoClient {
            answers: records
                .iter()
                .map(|r| (r.id.clone(), r.cot_text.clone()))
                .collect(),
        }
    }
}

impl ModelClient for GoldEchoClient {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, ClientError> {
        let id = request
            .problem_id
            .as_ref()
            .ok_or_else(|| ClientError::BadResponse("gold stub needs a problem id".into()))?;
        let text = self
            .answers
            .get(id)
            .ok_or_else(|| ClientError::BadResponse(format!("unknown problem id {id}")))?;
        Ok(CompletionResponse { text: text.clone() })
    }

    fn describe(&self) -> String {
        "stub:gold".into()
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Always returns the same text.
pub struct ConstantClient(pub String);

impl ModelClient for ConstantClient {
    fn complete(&self, _request: &CompletionRequest) -> Result<CompletionResponse, ClientError> {
        Ok(CompletionResponse {
            text: self.0.clone(),
        })
    }

    fn describe(&self) -> String {
        format!("stub:const:{}", self.0)
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Pattern-scripted stub: the first rule whose regex matches the prompt
/// produces the response. Script lines read `pattern => response`;
/// a line starting with `* => ` sets the fallback.
pub struct ScriptedClient {
    rules: Vec<(Regex, String)>,
    fallback: String,
}

impl ScriptedClient {
    pub fn parse(script: &str) -> Result<Self, ClientError> {
        let mut rules = Vec::new();
        let mut fallback = String::new();
        for line in script.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (pattern, response) = line
                .split_once(" => ")
                .ok_or_else(|| ClientError::Config(format!("bad script line: {line}")))?;
            if pattern == "*" {
                fallback = response.to_string();
            } else {
                let regex = Regex::new(pattern)
                    .map_err(|e| ClientError::Config(format!("bad pattern {pattern}: {e}")))?;
                rules.push((regex, response.to_string()));
            }
        }
        Ok(ScriptedClient { rules, fallback })
    }
}

impl ModelClient for ScriptedClient {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, ClientError> {
        for (regex, response) in &self.rules {
            if regex.is_match(&request.prompt) {
                return Ok(CompletionResponse {
                    text: response.clone(),
                });
            }
        }
        Ok(CompletionResponse {
            text: self.fallback.clone(),
        })
    }

    fn describe(&self) -> String {
        "stub:script".into()
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Adapter for the common chat-completions HTTP shape: POST
/// `{base_url}/chat/completions` with a single user message; the reply
/// text is `choices[0].message.content`. The auth token comes from the
/// `MWP_API_TOKEN` environment variable.
pub struct HttpClient {
    base_url: String,
    model: String,
    token: Option<String>,
    inner: reqwest::blocking::Client,
}

impl HttpClient {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Result<Self, ClientError> {
        let inner = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(300))
            .build()
            .map_err(|e| ClientError::Config(e.to_string()))?;
        Ok(HttpClient {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            model: model.into(),
            token: std::env::var(API_TOKEN_ENV).ok(),
            inner,
        })
    }
}

impl ModelClient for HttpClient {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, ClientError> {
        let url = format!("{}/chat/completions", self.base_url);
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        });
        let mut req = self.inner.post(&url).json(&body);
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let response = req
            .send()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = response.status();
        if status.is_server_error() {
            return Err(ClientError::Transport(format!("server error {status}")));
        }
        if !status.is_success() {
            return Err(ClientError::BadResponse(format!("status {status}")));
        }
        let payload: serde_json::Value = response
            .json()
            .map_err(|e| ClientError::BadResponse(e.to_string()))?;
        let text = payload["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| ClientError::BadResponse("missing choices[0].message.content".into()))?
            .to_string();
        Ok(CompletionResponse { text })
    }

    fn describe(&self) -> String {
        format!("http:{}@{}", self.model, self.base_url)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(prompt: &str, id: Option<&str>) -> CompletionRequest {
        CompletionRequest {
            prompt: prompt.into(),
            max_tokens: 64,
            temperature: 0.0,
            problem_id: id.map(str::to_string),
        }
    }

    #[test]
    fn constant_stub_echoes_its_text() {
        let client = ConstantClient("42".into());
        assert_eq!(client.complete(&request("anything", None)).unwrap().text, "42");
    }

    #[test]
    fn scripted_stub_matches_patterns_in_order() {
        let client = ScriptedClient::parse(
            "apples => So 7 apples.\nbananas => So 9 bananas.\n* => no idea\n",
        )
        .unwrap();
        assert_eq!(
            client.complete(&request("Q: count apples\nA:", None)).unwrap().text,
            "So 7 apples."
        );
        assert_eq!(
            client.complete(&request("pears?", None)).unwrap().text,
            "no idea"
        );
    }

    #[test]
    fn gold_echo_requires_a_known_id() {
        let client = GoldEchoClient {
            answers: HashMap::from([("p-1".to_string(), "answer 5.".to_string())]),
        };
        assert_eq!(
            client.complete(&request("x", Some("p-1"))).unwrap().text,
            "answer 5."
        );
        assert!(client.complete(&request("x", Some("p-2"))).is_err());
        assert!(client.complete(&request("x", None)).is_err());
    }
}
