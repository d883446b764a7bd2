//! Length-prefixed binary wire format. All integers are big-endian.
//!
//! ```text
//! frame   = len:u32 payload[len]                      (len <= 1 MiB)
//! query   = 0x01 session:u64 N:u16 K:u16 q:u64 index:u16 * K
//! answer  = 0x02 session:u64 kind:u8 body
//!   kind 0 (empty)   body = ""
//!   kind 1 (symbol)  body = value:u64
//!   kind 2 (error)   body = code:u16
//! ```
//!
//! `QueryMessage { session: 1, N: 3, K: 3, q: 257, indices: [0, 1, 1] }` is
//! the frame
//!
//! ```text
//! 00 00 00 1b  01  00 00 00 00 00 00 00 01  00 03  00 03
//! 00 00 00 00 00 00 01 01  00 00  00 01  00 01
//! ```

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::model::{Answer, Query};
use crate::params::SchemeParams;

pub const MAX_PAYLOAD: usize = 1 << 20;

const TAG_QUERY: u8 = 0x01;
const TAG_ANSWER: u8 = 0x02;
const KIND_EMPTY: u8 = 0;
const KIND_SYMBOL: u8 = 1;
const KIND_ERROR: u8 = 2;
const QUERY_HEADER: usize = 1 + 8 + 2 + 2 + 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("payload of {0} bytes exceeds the 1 MiB limit")]
    Oversize(usize),
    #[error("empty payload")]
    EmptyPayload,
    #[error("unknown message tag {0:#04x}")]
    UnknownTag(u8),
    #[error("unknown answer kind {0}")]
    UnknownKind(u8),
    #[error("payload is {actual} bytes, layout requires {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("a query cannot carry {0} indices")]
    TooManyIndices(usize),
}

/// Reasons a server refuses a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    ServerCountMismatch,
    MessageCountMismatch,
    ModulusMismatch,
    IndexOutOfRange,
    Malformed,
    Other(u16),
}

impl ErrorCode {
    pub fn code(self) -> u16 {
        match self {
            ErrorCode::ServerCountMismatch => 1,
            ErrorCode::MessageCountMismatch => 2,
            ErrorCode::ModulusMismatch => 3,
            ErrorCode::IndexOutOfRange => 4,
            ErrorCode::Malformed => 5,
            ErrorCode::Other(c) => c,
        }
    }

    pub fn from_code(code: u16) -> Self {
        match code {
            1 => ErrorCode::ServerCountMismatch,
            2 => ErrorCode::MessageCountMismatch,
            3 => ErrorCode::ModulusMismatch,
            4 => ErrorCode::IndexOutOfRange,
            5 => ErrorCode::Malformed,
            c => ErrorCode::Other(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryMessage {
    pub session_id: u64,
    pub servers: u16,
    pub messages: u16,
    pub modulus: u64,
    pub indices: Vec<u16>,
}

impl QueryMessage {
    pub fn from_query(session_id: u64, params: &SchemeParams, query: &Query) -> Self {
        Self {
            session_id,
            servers: params.servers() as u16,
            messages: params.messages() as u16,
            modulus: params.field().modulus(),
            indices: query.indices().iter().map(|&i| i as u16).collect(),
        }
    }

    pub fn to_query(&self) -> Query {
        Query::new(self.indices.iter().map(|&i| i as usize).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnswerBody {
    Empty,
    Symbol(u64),
    Error(ErrorCode),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnswerMessage {
    pub session_id: u64,
    pub body: AnswerBody,
}

impl AnswerMessage {
    pub fn from_answer(session_id: u64, answer: Answer) -> Self {
        let body = match answer {
            Answer::Empty => AnswerBody::Empty,
            Answer::Symbol(v) => AnswerBody::Symbol(v),
        };
        Self { session_id, body }
    }

    pub fn error(session_id: u64, code: ErrorCode) -> Self {
        Self { session_id, body: AnswerBody::Error(code) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WireMessage {
    Query(QueryMessage),
    Answer(AnswerMessage),
}

impl From<QueryMessage> for WireMessage {
    fn from(m: QueryMessage) -> Self {
        WireMessage::Query(m)
    }
}

impl From<AnswerMessage> for WireMessage {
    fn from(m: AnswerMessage) -> Self {
        WireMessage::Answer(m)
    }
}

pub fn encode_payload(msg: &WireMessage) -> Result<Vec<u8>, WireError> {
    let mut out = Vec::new();
    match msg {
        WireMessage::Query(q) => {
            if q.indices.len() > u16::MAX as usize || q.indices.len() != q.messages as usize {
                return Err(WireError::TooManyIndices(q.indices.len()));
            }
            out.reserve(QUERY_HEADER + 2 * q.indices.len());
            out.push(TAG_QUERY);
            out.extend_from_slice(&q.session_id.to_be_bytes());
            out.extend_from_slice(&q.servers.to_be_bytes());
            out.extend_from_slice(&q.messages.to_be_bytes());
            out.extend_from_slice(&q.modulus.to_be_bytes());
            for i in &q.indices {
                out.extend_from_slice(&i.to_be_bytes());
            }
        }
        WireMessage::Answer(a) => {
            out.push(TAG_ANSWER);
            out.extend_from_slice(&a.session_id.to_be_bytes());
            match a.body {
                AnswerBody::Empty => out.push(KIND_EMPTY),
                AnswerBody::Symbol(v) => {
                    out.push(KIND_SYMBOL);
                    out.extend_from_slice(&v.to_be_bytes());
                }
                AnswerBody::Error(code) => {
                    out.push(KIND_ERROR);
                    out.extend_from_slice(&code.code().to_be_bytes());
                }
            }
        }
    }
    if out.len() > MAX_PAYLOAD {
        return Err(WireError::Oversize(out.len()));
    }
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const W: usize>(&mut self) -> Result<[u8; W], WireError> {
        let end = self.pos + W;
        let bytes =
            self.buf.get(self.pos..end).ok_or(WireError::Truncated { needed: end, available: self.buf.len() })?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice has width W"))
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_be_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_be_bytes(self.take()?))
    }

    fn finish(&self, expected: usize) -> Result<(), WireError> {
        if self.buf.len() != expected {
            return Err(WireError::LengthMismatch { expected, actual: self.buf.len() });
        }
        Ok(())
    }
}

pub fn decode_payload(payload: &[u8]) -> Result<WireMessage, WireError> {
    if payload.len() > MAX_PAYLOAD {
        return Err(WireError::Oversize(payload.len()));
    }
    let mut c = Cursor { buf: payload, pos: 0 };
    let tag = c.u8().map_err(|_| WireError::EmptyPayload)?;
    match tag {
        TAG_QUERY => {
            let session_id = c.u64()?;
            let servers = c.u16()?;
            let messages = c.u16()?;
            let modulus = c.u64()?;
            let expected = QUERY_HEADER + 2 * messages as usize;
            if payload.len() < expected {
                return Err(WireError::Truncated { needed: expected, available: payload.len() });
            }
            c.finish(expected)?;
            let indices = (0..messages).map(|_| c.u16()).collect::<Result<_, _>>()?;
            Ok(WireMessage::Query(QueryMessage { session_id, servers, messages, modulus, indices }))
        }
        TAG_ANSWER => {
            let session_id = c.u64()?;
            let body = match c.u8()? {
                KIND_EMPTY => AnswerBody::Empty,
                KIND_SYMBOL => AnswerBody::Symbol(c.u64()?),
                KIND_ERROR => AnswerBody::Error(ErrorCode::from_code(c.u16()?)),
                k => return Err(WireError::UnknownKind(k)),
            };
            c.finish(c.pos)?;
            Ok(WireMessage::Answer(AnswerMessage { session_id, body }))
        }
        t => Err(WireError::UnknownTag(t)),
    }
}

pub fn encode_frame(msg: &WireMessage) -> Result<Vec<u8>, WireError> {
    let payload = encode_payload(msg)?;
    let mut out = Vec::with_capacity(4 + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

/// Decodes one frame from the front of `buf`; returns the message and the
/// number of bytes consumed.
pub fn decode_frame(buf: &[u8]) -> Result<(WireMessage, usize), WireError> {
    let header: [u8; 4] =
        buf.get(..4).ok_or(WireError::Truncated { needed: 4, available: buf.len() })?.try_into().expect("four bytes");
    let len = u32::from_be_bytes(header) as usize;
    if len > MAX_PAYLOAD {
        return Err(WireError::Oversize(len));
    }
    let payload = buf.get(4..4 + len).ok_or(WireError::Truncated { needed: 4 + len, available: buf.len() })?;
    Ok((decode_payload(payload)?, 4 + len))
}

/// Reads one complete frame (prefix included) from a stream. Returns `None`
/// on a clean end of stream before the first byte.
pub fn read_frame<R: Read>(reader: &mut R) -> io::Result<Option<Vec<u8>>> {
    let mut header = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match reader.read(&mut header[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(io::ErrorKind::UnexpectedEof.into()),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    let len = u32::from_be_bytes(header) as usize;
    if len > MAX_PAYLOAD {
        return Err(io::Error::new(io::ErrorKind::InvalidData, WireError::Oversize(len)));
    }
    let mut frame = vec![0u8; 4 + len];
    frame[..4].copy_from_slice(&header);
    reader.read_exact(&mut frame[4..])?;
    Ok(Some(frame))
}

pub fn write_frame<W: Write>(writer: &mut W, frame: &[u8]) -> io::Result<()> {
    writer.write_all(frame)?;
    writer.flush()
}
