use std::collections::HashMap;
use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::TcpStream;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use super::wire::{Reply, Request};
use super::{check_arity, Classifier, ClassifierError, FeatureVector, ItemError, Verdict};

struct Connection {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

/// Classifier served by an external process over the [`wire`](super::wire)
/// protocol.
///
/// The connection is opened lazily and shared behind a lock, so concurrent
/// callers are serialized. Any transport failure drops the connection; the
/// next call reconnects.
pub struct RemoteClassifier {
    endpoint: String,
    arity: usize,
    timeout: Duration,
    next_id: AtomicU64,
    conn: Mutex<Option<Connection>>,
}

impl std::fmt::Debug for RemoteClassifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteClassifier")
            .field("endpoint", &self.endpoint)
            .field("arity", &self.arity)
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl RemoteClassifier {
    pub fn new(endpoint: impl Into<String>, arity: usize, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into(),
            arity,
            timeout,
            next_id: AtomicU64::new(1),
            conn: Mutex::new(None),
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn connect(&self) -> Result<Connection, ClassifierError> {
        let stream = TcpStream::connect(&self.endpoint)?;
        stream.set_read_timeout(Some(self.timeout))?;
        stream.set_write_timeout(Some(self.timeout))?;
        stream.set_nodelay(true)?;
        Ok(Connection { reader: BufReader::new(stream.try_clone()?), writer: stream })
    }

    fn map_io(&self, e: std::io::Error) -> ClassifierError {
        match e.kind() {
            ErrorKind::WouldBlock | ErrorKind::TimedOut => ClassifierError::Timeout(self.timeout),
            _ => ClassifierError::Transport(e),
        }
    }

    fn read_reply(&self, conn: &mut Connection) -> Result<Reply, ClassifierError> {
        let mut line = String::new();
        let n = conn.reader.read_line(&mut line).map_err(|e| self.map_io(e))?;
        if n == 0 {
            return Err(ClassifierError::Closed);
        }
        Reply::parse(&line)
    }

    /// Sends every request, then collects replies keyed by id. Returns
    /// verdicts in request order.
    fn exchange(&self, xs: &[FeatureVector]) -> Result<Vec<Verdict>, ItemError> {
        for (index, x) in xs.iter().enumerate() {
            check_arity(self.arity, x).map_err(|source| ItemError { index, source })?;
        }
        let mut guard = self.conn.lock().unwrap_or_else(|p| p.into_inner());
        if guard.is_none() {
            *guard = Some(self.connect().map_err(|source| ItemError { index: 0, source })?);
        }
        let conn = guard.as_mut().expect("connected");

        let first = self.next_id.fetch_add(xs.len() as u64, Ordering::Relaxed);
        let ids: HashMap<u64, usize> = (0..xs.len()).map(|i| (first + i as u64, i)).collect();
        let result = (|| {
            let mut buf = String::new();
            for (i, x) in xs.iter().enumerate() {
                buf.push_str(&Request { id: first + i as u64, features: x.0.clone() }.to_line());
            }
            conn.writer
                .write_all(buf.as_bytes())
                .and_then(|_| conn.writer.flush())
                .map_err(|e| ItemError { index: 0, source: self.map_io(e) })?;

            let mut out: Vec<Option<Verdict>> = vec![None; xs.len()];
            for received in 0..xs.len() {
                let pending = out.iter().position(Option::is_none).unwrap_or(received);
                let reply = self.read_reply(conn).map_err(|source| ItemError { index: pending, source })?;
                let index = match ids.get(&reply.id()) {
                    Some(&i) if out[i].is_none() => i,
                    _ => {
                        return Err(ItemError {
                            index: pending,
                            source: ClassifierError::IdMismatch { expected: first + pending as u64, got: reply.id() },
                        })
                    }
                };
                out[index] = Some(reply.into_verdict().map_err(|source| ItemError { index, source })?);
            }
            Ok(out.into_iter().map(|v| v.expect("all replies received")).collect())
        })();
        if result.is_err() {
            *guard = None;
        }
        result
    }
}

impl Classifier for RemoteClassifier {
    fn arity(&self) -> usize {
        self.arity
    }

    fn classify(&self, x: &FeatureVector) -> Result<Verdict, ClassifierError> {
        self.exchange(std::slice::from_ref(x))
            .map(|mut v| v.remove(0))
            .map_err(|e| e.source)
    }

    fn classify_batch(&self, xs: &[FeatureVector]) -> Result<Vec<Verdict>, ItemError> {
        if xs.is_empty() {
            return Ok(Vec::new());
        }
        self.exchange(xs)
    }
}
