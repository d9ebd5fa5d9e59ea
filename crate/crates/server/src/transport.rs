//! Socket transports. Both carry the same line protocol: TCP as newline-delimited text,
//! WebSocket as one text message per line.

use std::future::{ready, Future};
use std::net::SocketAddr;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures_util::{Sink, SinkExt, Stream, StreamExt};
use serde_json::Value;
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::broadcast::error::RecvError;
use tokio_util::codec::{Framed, LinesCodec};

use crate::engine::EngineHandle;
use crate::protocol::{parse_client_line, ClientMessage, ServerMessage, PROTOCOL};

/// Time a client has to answer the server hello.
pub const HELLO_TIMEOUT: Duration = Duration::from_secs(10);

const MAX_LINE: usize = 64 * 1024;

/// Addresses to listen on; at least one should be set.
#[derive(Clone, Copy, Debug, Default)]
pub struct ServeOptions {
    pub tcp: Option<SocketAddr>,
    pub ws: Option<SocketAddr>,
}

/// Runs one client connection to completion.
///
/// The server greets first, then waits for the client's hello. A protocol mismatch is answered
/// with an `error` frame and the connection is closed.
pub async fn handle_connection<S, K, E>(engine: EngineHandle, incoming: S, outgoing: K)
where
    S: Stream<Item = Result<String, E>>,
    E: std::fmt::Display,
    K: Sink<String>,
{
    let mut incoming = std::pin::pin!(incoming);
    let mut outgoing = std::pin::pin!(outgoing);
    let Ok(hello) = engine.hello().await else { return };
    if outgoing.send(hello.to_line()).await.is_err() {
        return;
    }

    let refusal = match tokio::time::timeout(HELLO_TIMEOUT, incoming.next()).await {
        Ok(Some(Ok(line))) => match parse_client_line(&line) {
            Ok(ClientMessage::Hello { protocol }) if protocol == PROTOCOL => None,
            Ok(ClientMessage::Hello { protocol }) => {
                Some(format!("unsupported protocol {protocol:?}; this server speaks {PROTOCOL}"))
            }
            Ok(ClientMessage::Command { .. }) | Err(_) => Some(format!("expected hello for {PROTOCOL}")),
        },
        Ok(Some(Err(e))) => Some(format!("unreadable hello: {e}")),
        Ok(None) => return,
        Err(_) => Some("no hello received".to_owned()),
    };
    if let Some(message) = refusal {
        let _ = outgoing.send(ServerMessage::Error { message }.to_line()).await;
        let _ = outgoing.close().await;
        return;
    }

    let mut frames = engine.subscribe();
    loop {
        tokio::select! {
            line = incoming.next() => {
                let line = match line {
                    Some(Ok(line)) => line,
                    Some(Err(e)) => {
                        let reply = ServerMessage::reply_err(Value::Null, "protocol", e.to_string());
                        if outgoing.send(reply.to_line()).await.is_err() {
                            break;
                        }
                        continue;
                    }
                    None => break,
                };
                if line.trim().is_empty() {
                    continue;
                }
                let reply = match parse_client_line(&line) {
                    Ok(ClientMessage::Command { id, command }) => engine.reply(id, command).await,
                    Ok(ClientMessage::Hello { .. }) => {
                        ServerMessage::reply_err(Value::Null, "hello", "handshake already completed")
                    }
                    Err(rejection) => rejection,
                };
                if outgoing.send(reply.to_line()).await.is_err() {
                    break;
                }
            }
            frame = frames.recv() => match frame {
                Ok(frame) => {
                    if outgoing.send(frame.to_string()).await.is_err() {
                        break;
                    }
                }
                // A slow client skips frames rather than stalling the simulation.
                Err(RecvError::Lagged(_)) => continue,
                Err(RecvError::Closed) => break,
            },
        }
    }
}

async fn tcp_connection(engine: EngineHandle, stream: TcpStream) {
    let (sink, stream) = Framed::new(stream, LinesCodec::new_with_max_length(MAX_LINE)).split();
    handle_connection(engine, stream, sink).await;
}

/// Accepts line-protocol clients on `listener` until it fails.
pub async fn serve_tcp(listener: TcpListener, engine: EngineHandle) -> std::io::Result<()> {
    loop {
        let (stream, _) = listener.accept().await?;
        tokio::spawn(tcp_connection(engine.clone(), stream));
    }
}

async fn ws_upgrade(State(engine): State<EngineHandle>, upgrade: WebSocketUpgrade) -> Response {
    upgrade.on_upgrade(move |socket| ws_connection(engine, socket))
}

fn ws_connection(engine: EngineHandle, socket: WebSocket) -> impl Future<Output = ()> {
    let (sink, stream) = socket.split();
    let sink = sink.with(|line: String| ready(Ok::<_, axum::Error>(Message::Text(line.into()))));
    let stream = stream.take_while(|m| ready(!matches!(m, Ok(Message::Close(_)) | Err(_)))).filter_map(|m| {
        ready(match m {
            Ok(Message::Text(text)) => Some(Ok::<_, axum::Error>(text.as_str().to_owned())),
            _ => None,
        })
    });
    handle_connection(engine, stream, sink)
}

/// Router with the protocol endpoint at `/ws`, usable from browsers.
pub fn ws_router(engine: EngineHandle) -> Router {
    Router::new().route("/ws", get(ws_upgrade)).with_state(engine)
}

pub async fn serve_ws(listener: TcpListener, engine: EngineHandle) -> std::io::Result<()> {
    axum::serve(listener, ws_router(engine)).await
}

/// Binds the requested listeners and serves until one of them fails.
pub async fn serve(engine: EngineHandle, options: ServeOptions) -> std::io::Result<()> {
    let tcp = match options.tcp {
        Some(addr) => Some(TcpListener::bind(addr).await?),
        None => None,
    };
    let ws = match options.ws {
        Some(addr) => Some(TcpListener::bind(addr).await?),
        None => None,
    };
    match (tcp, ws) {
        (Some(t), Some(w)) => tokio::try_join!(serve_tcp(t, engine.clone()), serve_ws(w, engine)).map(|_| ()),
        (Some(t), None) => serve_tcp(t, engine).await,
        (None, Some(w)) => serve_ws(w, engine).await,
        (None, None) => Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "no listen address given")),
    }
}
