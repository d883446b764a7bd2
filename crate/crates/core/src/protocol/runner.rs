//! User side of one retrieval: sample a pattern, send N queries, collect N
//! answers, decode.
//!
//! Transports move encoded frames only, so the transcript (every query frame
//! followed by its answer frame, in server order) is the same bytes whether
//! the servers run in-process or behind sockets.

use std::collections::BTreeMap;
use std::io::{BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::thread;
use std::time::Duration;

use log::debug;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Answer, Database, Message, Query, RandomPattern, RetrievalRequest};
use crate::params::SchemeParams;
use crate::protocol::server::handle_frame;
use crate::protocol::wire::{decode_frame, encode_frame, read_frame, AnswerBody, QueryMessage, WireMessage};
use crate::retrieval::{build_queries, decode, downloaded_symbols};
use crate::schemes::sample_pattern;

/// Delivers one request frame to each server and returns the response
/// frames in the same order.
pub trait Transport {
    fn servers(&self) -> usize;
    fn exchange(&self, frames: &[Vec<u8>]) -> Result<Vec<Vec<u8>>>;
}

/// N replicas of one database, answered on the calling thread.
pub struct InProcess<'a> {
    db: &'a Database,
}

impl<'a> InProcess<'a> {
    pub fn new(db: &'a Database) -> Self {
        Self { db }
    }
}

impl Transport for InProcess<'_> {
    fn servers(&self) -> usize {
        self.db.subpackets() + 1
    }

    fn exchange(&self, frames: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
        Ok(frames.iter().map(|f| handle_frame(f, self.db)).collect())
    }
}

/// One connection per server, all N round trips in flight concurrently.
pub struct TcpTransport {
    endpoints: Vec<String>,
    timeout: Duration,
}

impl TcpTransport {
    pub fn new(endpoints: Vec<String>) -> Self {
        Self { endpoints, timeout: Duration::from_secs(10) }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    fn round_trip(&self, endpoint: &str, frame: &[u8]) -> std::io::Result<Vec<u8>> {
        let addr = endpoint
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, "address did not resolve"))?;
        let mut stream = TcpStream::connect_timeout(&addr, self.timeout)?;
        stream.set_read_timeout(Some(self.timeout))?;
        stream.set_write_timeout(Some(self.timeout))?;
        stream.set_nodelay(true)?;
        stream.write_all(frame)?;
        let mut reader = BufReader::new(stream);
        read_frame(&mut reader)?.ok_or_else(|| std::io::ErrorKind::UnexpectedEof.into())
    }
}

impl Transport for TcpTransport {
    fn servers(&self) -> usize {
        self.endpoints.len()
    }

    fn exchange(&self, frames: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
        if frames.len() != self.endpoints.len() {
            return Err(Error::Transport(format!("{} frames for {} endpoints", frames.len(), self.endpoints.len())));
        }
        thread::scope(|scope| {
            let workers: Vec<_> = self
                .endpoints
                .iter()
                .zip(frames)
                .map(|(ep, frame)| scope.spawn(move || self.round_trip(ep, frame)))
                .collect();
            workers
                .into_iter()
                .enumerate()
                .map(|(i, w)| {
                    w.join()
                        .expect("transport worker panicked")
                        .map_err(|e| Error::Transport(format!("server {} ({}): {e}", i + 1, self.endpoints[i])))
                })
                .collect()
        })
    }
}

#[derive(Clone, Debug)]
pub struct RetrievalOutcome {
    pub session_id: u64,
    pub pattern: RandomPattern,
    pub queries: Vec<Query>,
    pub answers: Vec<Answer>,
    pub message: Message,
    pub symbols: usize,
    pub transcript: Vec<u8>,
}

impl RetrievalOutcome {
    /// Downloaded symbols per message symbol.
    pub fn normalized_cost(&self) -> f64 {
        self.symbols as f64 / self.message.len() as f64
    }
}

/// Runs one retrieval. The session id is drawn first, then the pattern.
pub fn run_retrieval<T: Transport + ?Sized, R: Rng + ?Sized>(
    params: &SchemeParams,
    req: &RetrievalRequest,
    side_info: &BTreeMap<usize, Message>,
    transport: &T,
    rng: &mut R,
) -> Result<RetrievalOutcome> {
    let n = params.servers();
    if transport.servers() != n {
        return Err(Error::Validation(format!(
            "transport reaches {} servers, parameters say N={n}",
            transport.servers()
        )));
    }
    let session_id: u64 = rng.random();
    let pattern = sample_pattern(params, req, rng)?;
    let queries = build_queries(&pattern, req, params)?;
    let frames = queries
        .iter()
        .map(|q| encode_frame(&QueryMessage::from_query(session_id, params, q).into()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let replies = transport.exchange(&frames)?;
    if replies.len() != n {
        return Err(Error::ProtocolViolation(format!("{} replies for {n} queries", replies.len())));
    }

    let q = params.field().modulus();
    let mut answers = Vec::with_capacity(n);
    let mut transcript = Vec::new();
    for (i, (frame, reply)) in frames.iter().zip(&replies).enumerate() {
        let server = i + 1;
        let (msg, used) = decode_frame(reply)?;
        if used != reply.len() {
            return Err(Error::ProtocolViolation(format!("server {server} sent trailing bytes")));
        }
        let WireMessage::Answer(answer) = msg else {
            return Err(Error::ProtocolViolation(format!("server {server} replied with a query")));
        };
        if answer.session_id != session_id {
            return Err(Error::ProtocolViolation(format!(
                "server {server} answered session {} instead of {session_id}",
                answer.session_id
            )));
        }
        answers.push(match answer.body {
            AnswerBody::Empty => Answer::Empty,
            AnswerBody::Symbol(v) if v < q => Answer::Symbol(v),
            AnswerBody::Symbol(v) => {
                return Err(Error::ProtocolViolation(format!(
                    "server {server} returned {v}, outside the field of size {q}"
                )))
            }
            AnswerBody::Error(code) => return Err(Error::ServerRejected { server, code: code.code() }),
        });
        transcript.extend_from_slice(frame);
        transcript.extend_from_slice(reply);
    }
    let message = decode(&answers, &queries, &pattern, side_info, req, params)?;
    let symbols = downloaded_symbols(&answers);
    debug!("session {session_id:#x}: {symbols} symbols downloaded");
    Ok(RetrievalOutcome { session_id, pattern, queries, answers, message, symbols, transcript })
}

/// Compares the decoded message against the stored demand message.
pub fn self_check(outcome: &RetrievalOutcome, db: &Database, req: &RetrievalRequest) -> Result<()> {
    if &outcome.message != db.message(req.demand()) {
        return Err(Error::DecodeMismatch);
    }
    Ok(())
}

/// In-process retrieval against `db` with the self-check applied.
pub fn simulate_retrieval<R: Rng + ?Sized>(
    params: &SchemeParams,
    req: &RetrievalRequest,
    db: &Database,
    rng: &mut R,
) -> Result<RetrievalOutcome> {
    let outcome = run_retrieval(params, req, &db.side_info(req), &InProcess::new(db), rng)?;
    self_check(&outcome, db, req)?;
    Ok(outcome)
}
