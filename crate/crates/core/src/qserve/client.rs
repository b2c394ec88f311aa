use std::net::{SocketAddr, TcpStream, ToSocketAddrs};
use std::time::Duration;

use super::exec::{encode, handle_payload};
use super::wire::{read_frame, write_frame, Job, JobResult};
use super::QserveError;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Carries one request payload to a server and returns the response payload.
pub trait Transport {
    fn round_trip(&mut self, request: &[u8]) -> Result<Vec<u8>, QserveError>;
}

/// One TCP connection per round trip.
#[derive(Debug, Clone)]
pub struct TcpTransport {
    addr: SocketAddr,
    timeout: Duration,
}

impl TcpTransport {
    pub fn new(addr: SocketAddr) -> TcpTransport {
        TcpTransport {
            addr,
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> TcpTransport {
        self.timeout = timeout;
        self
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }
}

impl Transport for TcpTransport {
    fn round_trip(&mut self, request: &[u8]) -> Result<Vec<u8>, QserveError> {
        let mut stream = TcpStream::connect_timeout(&self.addr, self.timeout)?;
        stream.set_read_timeout(Some(self.timeout))?;
        stream.set_write_timeout(Some(self.timeout))?;
        stream.set_nodelay(true)?;
        write_frame(&mut stream, request)?;
        read_frame(&mut stream)?.ok_or(QserveError::Closed)
    }
}

/// Answers in the calling thread with the server's own handler; no socket.
#[derive(Debug, Clone, Copy, Default)]
pub struct InProcess;

impl Transport for InProcess {
    fn round_trip(&mut self, request: &[u8]) -> Result<Vec<u8>, QserveError> {
        Ok(encode(&handle_payload(request)))
    }
}

/// Serializes `job`, sends it, and checks the reply. Server-side errors come
/// back as [`QserveError::Server`] with the code and detail unchanged.
pub fn submit_via(transport: &mut dyn Transport, job: &Job) -> Result<JobResult, QserveError> {
    let request = serde_json::to_vec(job)?;
    let response = transport.round_trip(&request)?;
    let result: JobResult = serde_json::from_slice(&response)?;
    if let Some(code) = result.error {
        return Err(QserveError::Server {
            code,
            detail: result.detail.unwrap_or_default(),
        });
    }
    if result.id != job.id {
        return Err(QserveError::IdMismatch {
            sent: job.id.clone(),
            received: result.id,
        });
    }
    Ok(result)
}

/// [`submit_via`] over TCP with the default 30 s timeout.
pub fn submit<A: ToSocketAddrs>(addr: A, job: &Job) -> Result<JobResult, QserveError> {
    let addr = addr
        .to_socket_addrs()?
        .next()
        .ok_or_else(|| QserveError::Io("address resolved to nothing".into()))?;
    submit_via(&mut TcpTransport::new(addr), job)
}
