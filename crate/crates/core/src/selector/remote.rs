//! Selector backed by an OpenAI-compatible chat-completions endpoint.

use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::{Selector, SelectorError, WindowSelection};
use crate::condition::Annotation;
use crate::repr::{decode_coordinate, PromptTemplate};
use crate::table::{Question, Window};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteSelectorConfig {
    /// Full URL of the chat-completions route.
    pub endpoint: String,
    pub model: String,
    #[serde(default, skip_serializing)]
    pub api_key: Option<String>,
    /// Must stay 0: the fixed-point loop relies on a deterministic selector.
    #[serde(default)]
    pub temperature: f32,
    pub max_tokens: u32,
    /// Extra attempts after the first failure.
    pub retries: usize,
    #[serde(with = "millis")]
    pub timeout: Duration,
    #[serde(with = "millis")]
    pub backoff: Duration,
    pub max_in_flight: usize,
}

impl RemoteSelectorConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: None,
            temperature: 0.0,
            max_tokens: 512,
            retries: 3,
            timeout: Duration::from_secs(60),
            backoff: Duration::from_millis(500),
            max_in_flight: 8,
        }
    }

    pub fn validate(&self) -> Result<(), SelectorError> {
        if self.temperature != 0.0 {
            return Err(SelectorError::Config(format!(
                "temperature must be 0, got {}",
                self.temperature
            )));
        }
        if self.endpoint.trim().is_empty() {
            return Err(SelectorError::Config("endpoint is empty".into()));
        }
        if self.model.trim().is_empty() {
            return Err(SelectorError::Config("model is empty".into()));
        }
        if self.max_in_flight == 0 {
            return Err(SelectorError::Config("max_in_flight must be at least 1".into()));
        }
        Ok(())
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f32,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Counting semaphore bounding concurrent requests.
struct Permits {
    free: Mutex<usize>,
    ready: Condvar,
}

impl Permits {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n),
            ready: Condvar::new(),
        }
    }

    fn acquire(&self) -> PermitGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.ready.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        PermitGuard(self)
    }
}

struct PermitGuard<'a>(&'a Permits);

impl Drop for PermitGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.ready.notify_one();
    }
}

pub struct RemoteSelector {
    config: RemoteSelectorConfig,
    template: PromptTemplate,
    client: reqwest::blocking::Client,
    permits: Permits,
}

impl RemoteSelector {
    pub fn new(config: RemoteSelectorConfig, template: PromptTemplate) -> Result<Self, SelectorError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| SelectorError::Config(e.to_string()))?;
        let permits = Permits::new(config.max_in_flight);
        Ok(Self {
            config,
            template,
            client,
            permits,
        })
    }

    pub fn config(&self) -> &RemoteSelectorConfig {
        &self.config
    }

    /// Sends one prompt, retrying transport failures and non-success statuses.
    pub fn complete(&self, prompt: &str) -> Result<String, SelectorError> {
        let body = ChatRequest {
            model: &self.config.model,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
        };
        let attempts = self.config.retries + 1;
        let mut last_error = String::new();
        for attempt in 1..=attempts {
            if attempt > 1 {
                thread::sleep(self.config.backoff * (attempt as u32 - 1));
            }
            let _permit = self.permits.acquire();
            match self.send(&body) {
                Ok(text) => return Ok(text),
                Err(reason) => {
                    debug!("selector attempt {attempt}/{attempts} failed: {reason}");
                    last_error = reason;
                }
            }
        }
        Err(SelectorError::Unavailable {
            attempts,
            reason: last_error,
        })
    }

    fn send(&self, body: &ChatRequest<'_>) -> Result<String, String> {
        let mut request = self.client.post(&self.config.endpoint).json(body);
        if let Some(key) = &self.config.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| e.to_string())?;
        let status = response.status();
        if !status.is_success() {
            return Err(format!("HTTP {status}"));
        }
        let parsed: ChatResponse = response.json().map_err(|e| e.to_string())?;
        Ok(parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default())
    }
}

impl Selector for RemoteSelector {
    fn select(
        &self,
        window: &Window<'_>,
        question: &Question,
        _annotation: Option<&Annotation>,
    ) -> Result<WindowSelection, SelectorError> {
        let prompt = self.template.render(window, question);
        let text = self.complete(&prompt)?;
        let decoded = decode_coordinate(&text, window);
        if decoded.warnings > 0 {
            warn!(
                "window at {:?}: {} parse warning(s) in selector output",
                window.global_origin(),
                decoded.warnings
            );
        }
        Ok(WindowSelection {
            selection: decoded.selection,
            warnings: decoded.warnings,
        })
    }
}
