//! Wire protocol: one JSON object per line, discriminated by `kind`.
//!
//! The server opens with `hello`; the client answers with its own `hello` naming the protocol
//! it speaks. After that the client sends `command` messages, each carrying an id that the
//! matching `command_reply` echoes, while the server pushes `telemetry` and `event` frames.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use windlab_core::sim::{BenchEvent, Command, StatusReport};
use windlab_core::telemetry::TelemetrySample;

pub const PROTOCOL: &str = "windlab/1";

/// Messages sent by a client.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello { protocol: String },
    Command { id: Value, command: Command },
}

/// Messages sent by the server.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServerMessage {
    Hello {
        protocol: String,
        server: String,
        scenario: String,
        dt: f64,
        decimation: u64,
    },
    CommandReply {
        /// The client's id, or null when the message was too malformed to carry one.
        id: Value,
        ok: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<ReplyError>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        status: Option<Box<StatusReport>>,
    },
    Telemetry {
        sample: TelemetrySample,
    },
    Event(BenchEvent),
    /// Connection-level failure; the server closes the connection after sending it.
    Error {
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplyError {
    /// Command type that failed, or `"protocol"` for unparseable input.
    pub command: String,
    pub reason: String,
}

impl ServerMessage {
    pub fn reply_ok(id: Value, status: StatusReport) -> Self {
        ServerMessage::CommandReply { id, ok: true, error: None, status: Some(Box::new(status)) }
    }

    pub fn reply_err(id: Value, command: impl Into<String>, reason: impl Into<String>) -> Self {
        ServerMessage::CommandReply {
            id,
            ok: false,
            error: Some(ReplyError { command: command.into(), reason: reason.into() }),
            status: None,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("server messages serialise")
    }
}

/// A client line after parsing: either a message or a structured rejection to send back.
#[allow(clippy::result_large_err)]
pub fn parse_client_line(line: &str) -> Result<ClientMessage, ServerMessage> {
    let value: Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(e) => return Err(ServerMessage::reply_err(Value::Null, "protocol", format!("invalid JSON: {e}"))),
    };
    let id = value.get("id").cloned().unwrap_or(Value::Null);
    let command =
        value.get("command").and_then(|c| c.get("type")).and_then(Value::as_str).unwrap_or("protocol").to_owned();
    serde_json::from_value(value).map_err(|e| ServerMessage::reply_err(id, command, e.to_string()))
}
