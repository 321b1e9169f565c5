//! Shared call instrumentation. Every backend records what it was asked
//! and over which transport, so tests and the CLI can assert which
//! pipeline stages ran and that offline runs opened no sockets.

use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Chat,
    Search,
    Image,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transport {
    Fixture,
    Http,
    Local,
}

#[derive(Debug, Clone)]
pub struct CallRecord {
    pub channel: Channel,
    pub transport: Transport,
    /// Stage tag for chat calls, query for search, source for images.
    pub key: String,
}

#[derive(Debug, Clone, Default)]
pub struct CallLog(Arc<Mutex<Vec<CallRecord>>>);

impl CallLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, channel: Channel, transport: Transport, key: impl Into<String>) {
        self.0.lock().unwrap().push(CallRecord {
            channel,
            transport,
            key: key.into(),
        });
    }

    pub fn records(&self) -> Vec<CallRecord> {
        self.0.lock().unwrap().clone()
    }

    /// Tags of chat calls, in call order.
    pub fn chat_tags(&self) -> Vec<String> {
        self.records()
            .into_iter()
            .filter(|r| r.channel == Channel::Chat)
            .map(|r| r.key)
            .collect()
    }

    /// Number of calls that went over the network.
    pub fn http_calls(&self) -> usize {
        self.records()
            .iter()
            .filter(|r| r.transport == Transport::Http)
            .count()
    }
}
