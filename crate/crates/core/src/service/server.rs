//! Blocking WebSocket server: one thread per connection, sessions kept by
//! token so a dropped client can resume.

use std::collections::HashMap;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use tungstenite::{accept, Message, WebSocket};

use super::protocol::{parse_client, ClientMessage, ErrorCode, ServerMessage, Wire};
use super::session::Session;
use super::ServiceError;
use crate::seeds;

/// Builds a new session for a fresh token.
pub type SessionFactory = Arc<dyn Fn(String) -> Session + Send + Sync>;

type Sessions = Arc<Mutex<HashMap<String, Arc<Mutex<Session>>>>>;

pub struct ServerHandle {
    pub addr: SocketAddr,
    thread: JoinHandle<Result<(), ServiceError>>,
}

impl ServerHandle {
    /// Wait for the server to stop after its session limit.
    pub fn join(self) -> Result<(), ServiceError> {
        self.thread.join().map_err(|_| ServiceError::Protocol("server thread panicked".into()))?
    }
}

/// Serve on a background thread. With `limit`, stop after that many
/// sessions finish.
pub fn spawn(listener: TcpListener, factory: SessionFactory, seed: u64, limit: Option<usize>) -> Result<ServerHandle, ServiceError> {
    let addr = listener.local_addr()?;
    let thread = std::thread::spawn(move || serve(listener, factory, seed, limit));
    Ok(ServerHandle { addr, thread })
}

/// Accept connections until `limit` sessions have finished (forever when
/// `None`).
pub fn serve(listener: TcpListener, factory: SessionFactory, seed: u64, limit: Option<usize>) -> Result<(), ServiceError> {
    listener.set_nonblocking(true)?;
    let sessions: Sessions = Arc::default();
    let finished = Arc::new(AtomicUsize::new(0));
    let counter = Arc::new(AtomicU64::new(0));
    loop {
        if limit.is_some_and(|l| finished.load(Ordering::SeqCst) >= l) {
            return Ok(());
        }
        match listener.accept() {
            Ok((stream, _)) => {
                stream.set_nonblocking(false)?;
                let (sessions, finished, counter, factory) = (sessions.clone(), finished.clone(), counter.clone(), factory.clone());
                std::thread::spawn(move || {
                    if let Err(e) = connection(stream, &sessions, &finished, &counter, &factory, seed) {
                        eprintln!("connection closed: {e}");
                    }
                });
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(e.into()),
        }
    }
}

fn send(ws: &mut WebSocket<TcpStream>, msgs: Vec<ServerMessage>) -> Result<(), ServiceError> {
    for m in msgs {
        ws.send(Message::text(Wire::new(m).to_json()))?;
    }
    Ok(())
}

fn connection(
    stream: TcpStream,
    sessions: &Sessions,
    finished: &AtomicUsize,
    counter: &AtomicU64,
    factory: &SessionFactory,
    seed: u64,
) -> Result<(), ServiceError> {
    let mut ws = accept(stream).map_err(|e| ServiceError::Protocol(format!("handshake failed: {e}")))?;
    let mut current: Option<Arc<Mutex<Session>>> = None;
    loop {
        let text = match ws.read() {
            Ok(Message::Text(t)) => t.to_string(),
            Ok(Message::Close(_)) | Err(tungstenite::Error::ConnectionClosed) => return Ok(()),
            Ok(Message::Binary(_)) => {
                let e = ServerMessage::Error { code: ErrorCode::Malformed, message: "binary frames are not supported".into(), index: None };
                send(&mut ws, vec![e])?;
                continue;
            }
            Ok(_) => continue,
            Err(e) => return Err(e.into()),
        };
        let replies = match &current {
            Some(s) => s.lock().expect("session lock").handle_text(&text),
            None => match parse_client(&text) {
                Ok(ClientMessage::Hello { token: Some(tok), .. }) => match sessions.lock().expect("sessions lock").get(&tok) {
                    Some(s) => {
                        current = Some(s.clone());
                        s.lock().expect("session lock").resume()
                    }
                    None => vec![ServerMessage::Error { code: ErrorCode::UnknownSession, message: format!("no session {tok:?}"), index: None }],
                },
                Ok(ClientMessage::Hello { token: None, name }) => {
                    let n = counter.fetch_add(1, Ordering::SeqCst);
                    let token = format!("{:016x}", seeds::derive(seed, n));
                    let s = Arc::new(Mutex::new(factory(token.clone())));
                    sessions.lock().expect("sessions lock").insert(token, s.clone());
                    let replies = s.lock().expect("session lock").start(name);
                    current = Some(s);
                    replies
                }
                Ok(_) => vec![ServerMessage::Error { code: ErrorCode::Malformed, message: "send hello first".into(), index: None }],
                Err((code, message)) => vec![ServerMessage::Error { code, message, index: None }],
            },
        };
        send(&mut ws, replies)?;
        if let Some(s) = &current {
            let done = s.lock().expect("session lock").is_finished();
            if done {
                let token = s.lock().expect("session lock").token().to_string();
                sessions.lock().expect("sessions lock").remove(&token);
                finished.fetch_add(1, Ordering::SeqCst);
                let _ = ws.close(None);
                let _ = ws.flush();
                return Ok(());
            }
        }
    }
}
