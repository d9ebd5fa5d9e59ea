//! Live operator service for the wind bench.
//!
//! [`Engine`] runs the bench on its own thread; [`serve_tcp`] and [`ws_router`] expose it over
//! the line-delimited JSON protocol in [`protocol`].

pub mod engine;
mod error;
pub mod protocol;
pub mod transport;

pub use engine::{Engine, EngineHandle, EngineOptions, Frame};
pub use error::{Error, Result};
pub use protocol::{ClientMessage, ServerMessage, PROTOCOL};
pub use transport::{serve, serve_tcp, serve_ws, ws_router, ServeOptions};
