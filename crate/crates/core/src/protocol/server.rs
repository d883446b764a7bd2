//! Stateless answer server over TCP, one thread per connection.

use std::io::{BufReader, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use log::{debug, info, warn};

use crate::error::{Error, Result};
use crate::model::Database;
use crate::protocol::wire::{
    decode_payload, encode_frame, read_frame, write_frame, AnswerMessage, ErrorCode, QueryMessage, WireMessage,
};
use crate::retrieval::compute_answer;

const IDLE_TIMEOUT: Duration = Duration::from_secs(30);

/// Answers one query against `db`. The echoed `(N, K, q)` must match the
/// database, whose `L` fixes `N = L + 1`.
pub fn server_handle(query: &QueryMessage, db: &Database) -> AnswerMessage {
    let servers = db.subpackets() + 1;
    let reject = |code| AnswerMessage::error(query.session_id, code);
    if query.messages as usize != db.message_count() || query.indices.len() != db.message_count() {
        return reject(ErrorCode::MessageCountMismatch);
    }
    if query.servers as usize != servers {
        return reject(ErrorCode::ServerCountMismatch);
    }
    if query.modulus != db.field().modulus() {
        return reject(ErrorCode::ModulusMismatch);
    }
    if query.indices.iter().any(|&i| i as usize >= servers) {
        return reject(ErrorCode::IndexOutOfRange);
    }
    AnswerMessage::from_answer(query.session_id, compute_answer(&query.to_query(), db))
}

/// Maps one request frame to one response frame.
pub fn handle_frame(frame: &[u8], db: &Database) -> Vec<u8> {
    let reply = match frame.get(4..).map(decode_payload) {
        Some(Ok(WireMessage::Query(q))) => server_handle(&q, db),
        Some(Ok(WireMessage::Answer(a))) => AnswerMessage::error(a.session_id, ErrorCode::Malformed),
        _ => AnswerMessage::error(0, ErrorCode::Malformed),
    };
    encode_frame(&reply.into()).expect("answers are far below the size limit")
}

fn serve_connection(stream: TcpStream, db: &Database) -> std::io::Result<()> {
    let peer = stream.peer_addr().ok();
    stream.set_read_timeout(Some(IDLE_TIMEOUT))?;
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    while let Some(frame) = read_frame(&mut reader)? {
        let reply = handle_frame(&frame, db);
        debug!("{peer:?}: {} byte query, {} byte answer", frame.len(), reply.len());
        write_frame(&mut writer, &reply)?;
    }
    Ok(())
}

pub struct Server {
    listener: TcpListener,
    db: Arc<Database>,
}

impl Server {
    pub fn bind<A: ToSocketAddrs>(addr: A, db: Database) -> Result<Self> {
        let listener = TcpListener::bind(addr).map_err(|e| Error::Transport(format!("bind failed: {e}")))?;
        Ok(Self { listener, db: Arc::new(db) })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("bound listener has an address")
    }

    /// Accepts connections until `stop` is set (checked after each accept).
    fn accept_loop(self, stop: &AtomicBool) {
        info!("serving on {}", self.local_addr());
        for conn in self.listener.incoming() {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            match conn {
                Ok(stream) => {
                    let db = Arc::clone(&self.db);
                    thread::spawn(move || {
                        if let Err(e) = serve_connection(stream, &db) {
                            warn!("connection ended with error: {e}");
                        }
                    });
                }
                Err(e) => warn!("accept failed: {e}"),
            }
        }
    }

    /// Serves forever on the calling thread.
    pub fn run(self) {
        self.accept_loop(&AtomicBool::new(false));
    }

    /// Serves on a background thread until the handle is shut down or dropped.
    pub fn spawn(self) -> ServerHandle {
        let addr = self.local_addr();
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let thread = thread::spawn(move || self.accept_loop(&flag));
        ServerHandle { addr, stop, thread: Some(thread) }
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop_now();
    }

    fn stop_now(&mut self) {
        if let Some(thread) = self.thread.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect_timeout(&self.addr, Duration::from_secs(1));
            let _ = thread.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_now();
    }
}
