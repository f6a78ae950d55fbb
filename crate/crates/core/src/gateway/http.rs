//! Client for a remote model served behind `POST /v1/generate`.
//!
//! Request body: `{"task": ..., "input": ..., "answer"?: ...}`; response body:
//! `{"output": ...}`. Any status other than 200 is a transport failure.
//! Question answering sends `question: <q> context: <c>` as the input.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{Backend, BackendDescriptor, BackendKind, Capability, GatewayError, Task};

/// Environment variable holding the base URL of the HTTP backend.
pub const BACKEND_URL_ENV: &str = "QG_BACKEND_URL";

#[derive(Serialize)]
struct GenerateRequest<'a> {
    task: &'static str,
    input: std::borrow::Cow<'a, str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    answer: Option<&'a str>,
}

#[derive(Deserialize)]
struct GenerateResponse {
    output: String,
}

/// Enforces a minimum spacing between consecutive requests.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn per_second(requests: f64) -> Self {
        Self {
            interval: Duration::from_secs_f64(1.0 / requests.max(f64::MIN_POSITIVE)),
            next_slot: Mutex::new(None),
        }
    }

    pub fn acquire(&self) {
        let mut slot = self.next_slot.lock().unwrap_or_else(|e| e.into_inner());
        let now = Instant::now();
        if let Some(at) = *slot {
            if at > now {
                std::thread::sleep(at - now);
            }
        }
        *slot = Some(Instant::now() + self.interval);
    }
}

pub struct HttpBackend {
    endpoint: String,
    agent: ureq::Agent,
    descriptor: BackendDescriptor,
    limiter: Option<RateLimiter>,
}

impl HttpBackend {
    pub fn new(base_url: &str) -> Self {
        let base = base_url.trim_end_matches('/');
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(300)).build();
        let mut config = BTreeMap::new();
        config.insert("url".to_owned(), serde_json::Value::String(base.to_owned()));
        Self {
            endpoint: format!("{base}/v1/generate"),
            agent,
            descriptor: BackendDescriptor {
                name: "http".to_owned(),
                kind: BackendKind::Http,
                capabilities: [
                    Capability::ExtractAnswer,
                    Capability::GenerateQuestion,
                    Capability::AnswerQuestion,
                    Capability::Summarize,
                ]
                .into_iter()
                .collect(),
                highlight_marker: "<hl>".to_owned(),
                config,
            },
            limiter: None,
        }
    }

    pub fn from_env() -> Result<Self, GatewayError> {
        let url = std::env::var(BACKEND_URL_ENV)
            .map_err(|_| GatewayError::Transport(format!("{BACKEND_URL_ENV} is not set")))?;
        Ok(Self::new(&url))
    }

    pub fn with_rate_limit(mut self, requests_per_second: f64) -> Self {
        self.limiter = Some(RateLimiter::per_second(requests_per_second));
        self.descriptor
            .config
            .insert("requests_per_second".to_owned(), requests_per_second.into());
        self
    }

    pub fn with_highlight_marker(mut self, marker: &str) -> Self {
        self.descriptor.highlight_marker = marker.to_owned();
        self
    }

    /// Records a decoding or backend parameter in the descriptor.
    pub fn with_config(mut self, key: &str, value: serde_json::Value) -> Self {
        self.descriptor.config.insert(key.to_owned(), value);
        self
    }

    fn request<'a>(task: &'a Task<'a>) -> GenerateRequest<'a> {
        match *task {
            Task::ExtractAnswer { highlighted } => GenerateRequest {
                task: "extract_answer",
                input: highlighted.into(),
                answer: None,
            },
            Task::GenerateQuestion { context, answer } => GenerateRequest {
                task: "generate_question",
                input: context.into(),
                answer: Some(answer),
            },
            Task::AnswerQuestion { context, question } => GenerateRequest {
                task: "answer_question",
                input: format!("question: {question} context: {context}").into(),
                answer: None,
            },
            Task::Summarize { text } => GenerateRequest { task: "summarize", input: text.into(), answer: None },
        }
    }
}

impl Backend for HttpBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn run(&self, task: &Task<'_>) -> Result<String, GatewayError> {
        if let Some(limiter) = &self.limiter {
            limiter.acquire();
        }
        let body = Self::request(task);
        let response = match self.agent.post(&self.endpoint).send_json(&body) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, _)) => {
                return Err(GatewayError::Transport(format!("{} returned status {code}", self.endpoint)))
            }
            Err(e) => return Err(GatewayError::Transport(e.to_string())),
        };
        if response.status() != 200 {
            return Err(GatewayError::Transport(format!(
                "{} returned status {}",
                self.endpoint,
                response.status()
            )));
        }
        let parsed: GenerateResponse = response
            .into_json()
            .map_err(|e| GatewayError::Transport(format!("malformed response: {e}")))?;
        Ok(parsed.output)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_shapes() {
        let t = Task::GenerateQuestion { context: "ctx", answer: "ans" };
        let v = serde_json::to_value(HttpBackend::request(&t)).unwrap();
        assert_eq!(v, serde_json::json!({"task": "generate_question", "input": "ctx", "answer": "ans"}));
        let t = Task::Summarize { text: "long" };
        let v = serde_json::to_value(HttpBackend::request(&t)).unwrap();
        assert_eq!(v, serde_json::json!({"task": "summarize", "input": "long"}));
        let t = Task::AnswerQuestion { context: "c", question: "q?" };
        let v = serde_json::to_value(HttpBackend::request(&t)).unwrap();
        assert_eq!(v["input"], "question: q? context: c");
    }

    #[test]
    fn limiter_spaces_requests() {
        let l = RateLimiter::per_second(50.0);
        let start = Instant::now();
        for _ in 0..3 {
            l.acquire();
        }
        assert!(start.elapsed() >= Duration::from_millis(39));
    }
}
