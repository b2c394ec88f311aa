use std::collections::VecDeque;
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use log::{debug, info, warn};

use super::exec::{encode, handle_payload};
use super::wire::{read_frame, write_frame, JobResult};
use super::QserveError;

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    /// Jobs executing at once across all connections.
    pub max_concurrent_jobs: usize,
    /// Entries kept in the in-memory job log.
    pub log_capacity: usize,
    /// Idle connections are dropped after this long; `None` waits forever.
    pub idle_timeout: Option<Duration>,
}

impl Default for ServerConfig {
    fn default() -> ServerConfig {
        ServerConfig {
            max_concurrent_jobs: 4,
            log_capacity: 256,
            idle_timeout: Some(Duration::from_secs(300)),
        }
    }
}

/// Metadata the server keeps about a job. Payload contents are never logged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobMeta {
    pub id: String,
    pub request_bytes: usize,
    pub response_bytes: usize,
    pub elapsed: Duration,
    /// Error code, if the job failed.
    pub error: Option<String>,
}

struct Shared {
    stop: AtomicBool,
    config: ServerConfig,
    log: Mutex<VecDeque<JobMeta>>,
    running: Mutex<usize>,
    slot_freed: Condvar,
    /// Connection threads with a handle on their socket for shutdown.
    workers: Mutex<Vec<(JoinHandle<()>, Option<TcpStream>)>>,
}

impl Shared {
    fn run_job(&self, payload: &[u8]) -> JobResult {
        let mut running = self.running.lock().unwrap();
        while *running >= self.config.max_concurrent_jobs.max(1) {
            running = self.slot_freed.wait(running).unwrap();
        }
        *running += 1;
        drop(running);
        let result = handle_payload(payload);
        *self.running.lock().unwrap() -= 1;
        self.slot_freed.notify_one();
        result
    }

    fn record(&self, meta: JobMeta) {
        info!(
            "job `{}`: {} bytes in, {} bytes out, {:?}{}",
            meta.id,
            meta.request_bytes,
            meta.response_bytes,
            meta.elapsed,
            meta.error
                .as_deref()
                .map(|e| format!(", error {e}"))
                .unwrap_or_default()
        );
        let mut log = self.log.lock().unwrap();
        if self.config.log_capacity == 0 {
            return;
        }
        while log.len() >= self.config.log_capacity {
            log.pop_front();
        }
        log.push_back(meta);
    }
}

/// A running server. Dropping the handle shuts the server down.
pub struct ServerHandle {
    addr: SocketAddr,
    shared: Arc<Shared>,
    acceptor: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Oldest first.
    pub fn job_log(&self) -> Vec<JobMeta> {
        self.shared.log.lock().unwrap().iter().cloned().collect()
    }

    /// Stops accepting, closes open connections and joins every thread.
    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        let Some(acceptor) = self.acceptor.take() else {
            return;
        };
        self.shared.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let _ = TcpStream::connect(self.addr);
        let _ = acceptor.join();
        let workers: Vec<_> = self.shared.workers.lock().unwrap().drain(..).collect();
        for (worker, conn) in workers {
            if let Some(conn) = conn {
                let _ = conn.shutdown(Shutdown::Both);
            }
            let _ = worker.join();
        }
        debug!("server on {} stopped", self.addr);
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Binds `addr` and serves jobs on background threads, one per connection.
pub fn serve<A: ToSocketAddrs>(addr: A, config: ServerConfig) -> Result<ServerHandle, QserveError> {
    let listener = TcpListener::bind(addr)?;
    let addr = listener.local_addr()?;
    let shared = Arc::new(Shared {
        stop: AtomicBool::new(false),
        config,
        log: Mutex::new(VecDeque::new()),
        running: Mutex::new(0),
        slot_freed: Condvar::new(),
        workers: Mutex::new(Vec::new()),
    });
    let acceptor = {
        let shared = Arc::clone(&shared);
        thread::Builder::new()
            .name("qserve-accept".into())
            .spawn(move || accept_loop(listener, shared))?
    };
    info!("serving on {addr}");
    Ok(ServerHandle {
        addr,
        shared,
        acceptor: Some(acceptor),
    })
}

fn accept_loop(listener: TcpListener, shared: Arc<Shared>) {
    for stream in listener.incoming() {
        if shared.stop.load(Ordering::SeqCst) {
            break;
        }
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                warn!("accept failed: {e}");
                continue;
            }
        };
        let clone = stream.try_clone().ok();
        let worker_shared = Arc::clone(&shared);
        match thread::Builder::new()
            .name("qserve-conn".into())
            .spawn(move || serve_connection(stream, &worker_shared))
        {
            Ok(handle) => {
                let mut workers = shared.workers.lock().unwrap();
                workers.retain(|(w, _)| !w.is_finished());
                workers.push((handle, clone));
            }
            Err(e) => warn!("could not spawn connection thread: {e}"),
        }
    }
}

fn serve_connection(mut stream: TcpStream, shared: &Shared) {
    let _ = stream.set_read_timeout(shared.config.idle_timeout);
    let _ = stream.set_nodelay(true);
    loop {
        let payload = match read_frame(&mut stream) {
            Ok(Some(p)) => p,
            Ok(None) => break,
            Err(QserveError::FrameTooLarge(n)) => {
                // The stream cannot be resynchronized past an unread body.
                let reply = JobResult::error(
                    "",
                    "frame_error",
                    format!("frame of {n} bytes is too large"),
                );
                let _ = write_frame(&mut stream, &encode(&reply));
                break;
            }
            Err(e) => {
                debug!("connection closed: {e}");
                break;
            }
        };
        let start = Instant::now();
        let result = shared.run_job(&payload);
        let bytes = encode(&result);
        shared.record(JobMeta {
            id: result.id.clone(),
            request_bytes: payload.len(),
            response_bytes: bytes.len(),
            elapsed: start.elapsed(),
            error: result.error.clone(),
        });
        if write_frame(&mut stream, &bytes).is_err() {
            break;
        }
    }
    let _ = stream.shutdown(Shutdown::Both);
}
