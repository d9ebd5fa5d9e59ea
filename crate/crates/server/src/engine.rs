//! The simulation thread and its handles.
//!
//! One thread owns the [`Session`]. Commands reach it through an ordered queue and are
//! applied strictly between two steps; samples leave it as immutable, pre-serialised frames
//! on a broadcast channel, and optionally as full-rate rows to a CSV writer thread.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::sync::{mpsc as std_mpsc, Arc};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde_json::Value;
use tokio::sync::{broadcast, mpsc, oneshot};

use windlab_core::sim::{BenchConfig, BenchEvent, Command, Session, StatusReport};
use windlab_core::telemetry::{CsvLog, TelemetrySample};

use crate::protocol::{ServerMessage, PROTOCOL};
use crate::{Error, Result};

/// A serialised server frame shared by every subscriber.
pub type Frame = Arc<str>;

const FRAME_BUFFER: usize = 4096;

#[derive(Clone, Debug, Default)]
pub struct EngineOptions {
    /// Simulated seconds per wall-clock second; `None` runs as fast as possible.
    pub pace: Option<f64>,
    /// Full-rate CSV log of every step.
    pub log: Option<PathBuf>,
}

type Reply = std::result::Result<StatusReport, (String, String)>;

enum Request {
    Command { command: Command, reply: oneshot::Sender<Reply> },
    Hello { reply: oneshot::Sender<ServerMessage> },
    Shutdown,
}

/// Cloneable handle to the simulation thread.
#[derive(Clone)]
pub struct EngineHandle {
    requests: mpsc::UnboundedSender<Request>,
    frames: broadcast::Sender<Frame>,
}

impl EngineHandle {
    /// Queues a command and waits for the simulation thread to apply it.
    pub async fn submit(&self, command: Command) -> Reply {
        let name = command.name().to_owned();
        let (tx, rx) = oneshot::channel();
        if self.requests.send(Request::Command { command, reply: tx }).is_err() {
            return Err((name, "simulation stopped".into()));
        }
        rx.await.unwrap_or_else(|_| Err((name, "simulation stopped".into())))
    }

    /// Applies `command` and builds the reply frame for client id `id`.
    pub async fn reply(&self, id: Value, command: Command) -> ServerMessage {
        match self.submit(command).await {
            Ok(status) => ServerMessage::reply_ok(id, status),
            Err((command, reason)) => ServerMessage::reply_err(id, command, reason),
        }
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Frame> {
        self.frames.subscribe()
    }

    /// The server's opening hello for the currently loaded scenario.
    pub async fn hello(&self) -> Result<ServerMessage> {
        let (tx, rx) = oneshot::channel();
        self.requests.send(Request::Hello { reply: tx }).map_err(|_| Error::Stopped)?;
        rx.await.map_err(|_| Error::Stopped)
    }
}

/// Owner of the simulation thread. Dropping it stops the thread.
pub struct Engine {
    handle: EngineHandle,
    thread: Option<JoinHandle<()>>,
}

impl Engine {
    pub fn start(config: BenchConfig, scenario: &str, options: EngineOptions) -> Result<Self> {
        if let Some(p) = options.pace {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::Options(format!("pace must be positive, got {p}")));
            }
        }
        let session = Session::new(config, scenario)?;
        let log = match &options.log {
            Some(path) => Some(LogWorker::spawn(File::create(path)?)?),
            None => None,
        };
        let (requests, inbox) = mpsc::unbounded_channel();
        let (frames, _) = broadcast::channel(FRAME_BUFFER);
        let handle = EngineHandle { requests, frames: frames.clone() };
        let mut sim = SimLoop { session, inbox, frames, pace: options.pace, log, clock: None };
        let thread = thread::Builder::new().name("windlab-sim".into()).spawn(move || sim.run())?;
        Ok(Self { handle, thread: Some(thread) })
    }

    pub fn handle(&self) -> EngineHandle {
        self.handle.clone()
    }
}

impl Drop for Engine {
    fn drop(&mut self) {
        let _ = self.handle.requests.send(Request::Shutdown);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

struct LogWorker {
    tx: std_mpsc::Sender<TelemetrySample>,
    thread: JoinHandle<()>,
}

impl LogWorker {
    fn spawn(file: File) -> Result<Self> {
        let mut log = CsvLog::new(BufWriter::new(file))?;
        let (tx, rx) = std_mpsc::channel::<TelemetrySample>();
        let thread = thread::Builder::new().name("windlab-log".into()).spawn(move || {
            for sample in rx {
                if log.write(&sample).is_err() {
                    return;
                }
            }
            let _ = log.finish();
        })?;
        Ok(Self { tx, thread })
    }

    fn finish(self) {
        drop(self.tx);
        let _ = self.thread.join();
    }
}

struct SimLoop {
    session: Session,
    inbox: mpsc::UnboundedReceiver<Request>,
    frames: broadcast::Sender<Frame>,
    pace: Option<f64>,
    log: Option<LogWorker>,
    /// Wall-clock anchor of the paced run: (instant, simulated time at that instant).
    clock: Option<(Instant, f64)>,
}

impl SimLoop {
    fn run(&mut self) {
        if let Some(log) = &self.log {
            let _ = log.tx.send(self.session.status().sample);
        }
        loop {
            if self.session.is_running() {
                loop {
                    match self.inbox.try_recv() {
                        Ok(Request::Shutdown) => return self.stop(),
                        Ok(req) => self.apply(req),
                        Err(mpsc::error::TryRecvError::Empty) => break,
                        Err(mpsc::error::TryRecvError::Disconnected) => return self.stop(),
                    }
                }
                if self.session.is_running() {
                    self.advance();
                }
            } else {
                self.clock = None;
                match self.inbox.blocking_recv() {
                    Some(Request::Shutdown) | None => return self.stop(),
                    Some(req) => self.apply(req),
                }
            }
        }
    }

    fn stop(&mut self) {
        if let Some(log) = self.log.take() {
            log.finish();
        }
    }

    fn publish(&self, msg: &ServerMessage) {
        // No subscribers is not an error: frames are simply dropped.
        let _ = self.frames.send(Frame::from(msg.to_line()));
    }

    fn publish_events(&self, events: Vec<BenchEvent>) {
        for e in events {
            self.publish(&ServerMessage::Event(e));
        }
    }

    fn apply(&mut self, req: Request) {
        let (command, reply) = match req {
            Request::Command { command, reply } => (command, reply),
            Request::Hello { reply } => {
                let _ = reply.send(ServerMessage::Hello {
                    protocol: PROTOCOL.into(),
                    server: concat!("windlab-server ", env!("CARGO_PKG_VERSION")).into(),
                    scenario: self.session.status().scenario,
                    dt: self.session.dt(),
                    decimation: self.session.decimation(),
                });
                return;
            }
            Request::Shutdown => return,
        };
        let reloading = matches!(command, Command::LoadScenario { .. });
        let result = match self.session.handle(&command) {
            Ok((status, events)) => {
                self.publish_events(events);
                if reloading {
                    if let Some(log) = &self.log {
                        let _ = log.tx.send(status.sample.clone());
                    }
                }
                Ok(status)
            }
            Err(e) => Err((e.command.to_owned(), e.reason)),
        };
        let _ = reply.send(result);
    }

    fn advance(&mut self) {
        if self.session.status().step >= self.session.bench().scenario().steps() {
            // End of scenario: stop and leave the final state for status queries.
            let _ = self.session.handle(&Command::Pause);
            return;
        }
        let outcome = match self.session.step() {
            Ok(o) => o,
            Err(e) => {
                let _ = self.session.handle(&Command::Pause);
                self.publish(&ServerMessage::Error { message: e.to_string() });
                return;
            }
        };
        if let Some(log) = &self.log {
            let _ = log.tx.send(outcome.sample.clone());
        }
        self.publish_events(outcome.events);
        if outcome.broadcast {
            self.publish(&ServerMessage::Telemetry { sample: outcome.sample.clone() });
        }
        if let Some(speed) = self.pace {
            let (anchor, t0) = *self.clock.get_or_insert((Instant::now(), outcome.sample.t - self.session.dt()));
            let due = anchor + Duration::from_secs_f64(((outcome.sample.t - t0) / speed).max(0.0));
            let now = Instant::now();
            if due > now {
                thread::sleep(due - now);
            }
        }
    }
}
