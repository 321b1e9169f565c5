//! Chat-completion carrier for all agent calls.
//!
//! Wire shape (live mode): `POST {endpoint}` with JSON body
//! `{model, temperature, messages: [{role, content: [part...]}]}` where a
//! part is `{"type": "text", "text": ...}` or
//! `{"type": "image", "content_type": ..., "data": <base64>}`. The reply
//! text is taken from `choices[0].text`.

use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calllog::{CallLog, Channel, Transport};
use crate::error::{GatewayError, Result};
use crate::net::with_retries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageRole {
    System,
    User,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MessagePart {
    Text(String),
    Image { bytes: Vec<u8>, content_type: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatMessage {
    pub role: MessageRole,
    pub parts: Vec<MessagePart>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseFormat {
    FreeText,
    Structured,
}

/// One agent call. `tag` names the pipeline stage ("classify", "plan", …)
/// and is the primary fixture-matching key.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub response_format: ResponseFormat,
    pub tag: String,
}

impl ChatRequest {
    /// Deterministic stages run at temperature 0.
    pub fn new(tag: impl Into<String>) -> Self {
        ChatRequest {
            messages: Vec::new(),
            temperature: 0.0,
            response_format: ResponseFormat::FreeText,
            tag: tag.into(),
        }
    }

    pub fn structured(mut self) -> Self {
        self.response_format = ResponseFormat::Structured;
        self
    }

    pub fn system(mut self, text: impl Into<String>) -> Self {
        self.messages.push(ChatMessage {
            role: MessageRole::System,
            parts: vec![MessagePart::Text(text.into())],
        });
        self
    }

    pub fn user(mut self, text: impl Into<String>) -> Self {
        self.messages.push(ChatMessage {
            role: MessageRole::User,
            parts: vec![MessagePart::Text(text.into())],
        });
        self
    }

    pub fn user_parts(mut self, parts: Vec<MessagePart>) -> Self {
        self.messages.push(ChatMessage {
            role: MessageRole::User,
            parts,
        });
        self
    }

    /// Hex digest of the full prompt, usable to pin fixture entries to an
    /// exact rendering.
    pub fn prompt_digest(&self) -> String {
        let mut hasher = Sha256::new();
        for msg in &self.messages {
            hasher.update(match msg.role {
                MessageRole::System => b"S|",
                MessageRole::User => b"U|",
            });
            for part in &msg.parts {
                match part {
                    MessagePart::Text(t) => {
                        hasher.update(b"t:");
                        hasher.update(t.as_bytes());
                    }
                    MessagePart::Image { bytes, content_type } => {
                        hasher.update(b"i:");
                        hasher.update(content_type.as_bytes());
                        hasher.update(bytes);
                    }
                }
                hasher.update(b"|");
            }
        }
        hex(&hasher.finalize())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatResponse {
    pub text: String,
    /// (prompt_units, completion_units) when the provider reports them.
    pub usage: Option<(u64, u64)>,
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse>;
}

/// One round-trip to the configured backend.
pub fn complete_chat(backend: &dyn ChatBackend, req: &ChatRequest) -> Result<ChatResponse> {
    backend.complete(req)
}

pub struct HttpChatBackend {
    endpoint: String,
    api_key: String,
    model: String,
    client: reqwest::blocking::Client,
    log: CallLog,
}

impl HttpChatBackend {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>, model: impl Into<String>, log: CallLog) -> Self {
        HttpChatBackend {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            model: model.into(),
            client: reqwest::blocking::Client::new(),
            log,
        }
    }

    fn body(&self, req: &ChatRequest) -> serde_json::Value {
        let messages: Vec<serde_json::Value> = req
            .messages
            .iter()
            .map(|m| {
                let content: Vec<serde_json::Value> = m
                    .parts
                    .iter()
                    .map(|p| match p {
                        MessagePart::Text(t) => serde_json::json!({"type": "text", "text": t}),
                        MessagePart::Image { bytes, content_type } => serde_json::json!({
                            "type": "image",
                            "content_type": content_type,
                            "data": base64::engine::general_purpose::STANDARD.encode(bytes),
                        }),
                    })
                    .collect();
                let role = match m.role {
                    MessageRole::System => "system",
                    MessageRole::User => "user",
                };
                serde_json::json!({"role": role, "content": content})
            })
            .collect();
        serde_json::json!({
            "model": self.model,
            "temperature": req.temperature,
            "messages": messages,
        })
    }
}

impl ChatBackend for HttpChatBackend {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse> {
        self.log.record(Channel::Chat, Transport::Http, &req.tag);
        let body = self.body(req);
        let value: serde_json::Value = with_retries(|| {
            let resp = self
                .client
                .post(&self.endpoint)
                .bearer_auth(&self.api_key)
                .json(&body)
                .send()
                .map_err(|e| GatewayError::Transport {
                    status: None,
                    detail: e.to_string(),
                })?;
            let status = resp.status();
            let text = resp.text().unwrap_or_default();
            if !status.is_success() {
                return Err(GatewayError::Transport {
                    status: Some(status.as_u16()),
                    detail: excerpt(&text),
                });
            }
            serde_json::from_str(&text).map_err(|e| GatewayError::Transport {
                status: Some(status.as_u16()),
                detail: format!("unparseable response body: {e}"),
            })
        })?;

        let text = value["choices"][0]["text"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| GatewayError::Transport {
                status: None,
                detail: "response has no choices[0].text".to_string(),
            })?;
        if text.is_empty() {
            return Err(GatewayError::Transport {
                status: None,
                detail: "empty completion text".to_string(),
            });
        }
        let usage = value.get("usage").and_then(|u| {
            Some((
                u.get("prompt_units")?.as_u64()?,
                u.get("completion_units")?.as_u64()?,
            ))
        });
        Ok(ChatResponse { text, usage })
    }
}

pub(crate) fn excerpt(body: &str) -> String {
    const LIMIT: usize = 200;
    if body.len() <= LIMIT {
        body.to_string()
    } else {
        let mut end = LIMIT;
        while !body.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}…", &body[..end])
    }
}
