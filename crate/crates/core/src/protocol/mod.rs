//! Wire format, server, file formats and the retrieval runner.

pub mod config;
pub mod dbfile;
pub mod runner;
pub mod server;
pub mod wire;

pub use config::ServerConfig;
pub use runner::{run_retrieval, InProcess, RetrievalOutcome, TcpTransport, Transport};
pub use server::{server_handle, Server, ServerHandle};
pub use wire::{AnswerBody, AnswerMessage, ErrorCode, QueryMessage, WireError, WireMessage};
