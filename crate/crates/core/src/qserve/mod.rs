//! Untrusted execution server and its client transport.
//!
//! Jobs travel as length-prefixed JSON frames over TCP: a 4-byte big-endian
//! payload length, then a UTF-8 JSON object. Each request frame gets exactly
//! one response frame. This module sees circuits and execution parameters
//! only; it has no access to key material.

mod client;
mod exec;
mod server;
mod wire;

use std::io;

use thiserror::Error;

use crate::circ::CircError;
use crate::qsim::SimError;

pub use client::{submit, submit_via, InProcess, TcpTransport, Transport, DEFAULT_TIMEOUT};
pub use exec::{apply_depolarizing, execute, handle_payload};
pub use server::{serve, JobMeta, ServerConfig, ServerHandle};
pub use wire::{
    read_frame, write_frame, BasisResult, BasisSpec, ExecMode, Job, JobResult, Postselect,
    WireBasis, MAX_FRAME_BYTES,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QserveError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("timed out waiting for the peer")]
    Timeout,
    #[error("connection closed before a response arrived")]
    Closed,
    #[error("stream ended inside a frame")]
    Truncated,
    #[error("frame of {0} bytes exceeds the limit")]
    FrameTooLarge(usize),
    #[error("malformed message: {0}")]
    Json(String),
    #[error("response id `{received}` does not match request id `{sent}`")]
    IdMismatch { sent: String, received: String },
    #[error("server error {code}: {detail}")]
    Server { code: String, detail: String },
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Circuit(#[from] CircError),
}

impl From<io::Error> for QserveError {
    fn from(e: io::Error) -> QserveError {
        match e.kind() {
            io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock => QserveError::Timeout,
            _ => QserveError::Io(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for QserveError {
    fn from(e: serde_json::Error) -> QserveError {
        QserveError::Json(e.to_string())
    }
}
