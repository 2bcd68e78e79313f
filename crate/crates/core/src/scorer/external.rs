//! External scoring over a child process speaking line-delimited JSON.
//!
//! One JSON object per line on stdin/stdout (UTF-8):
//!
//! ```text
//! {"op":"planner","qid":"...","text":"..."}            -> {"weights":{"17":0.53,...}}
//! {"op":"step","qid":"...","text":"...","prefix":[3]}  -> {"logits":[...V floats...]}
//! {"op":"shutdown"}                                    -> process exits 0
//! ```
//!
//! Requests are serialized per child process; parallelism comes from running
//! a pool of processes. Responses are validated (length V, finite) before
//! use, and protocol errors echo the offending request.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::Query;
use crate::error::{Error, Result};
use crate::scorer::{validate_logits, PlannerWeights, Scorer, StepLogits};

/// A request line in the external-scorer protocol.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Request {
    Planner { qid: String, text: String },
    Step { qid: String, text: String, prefix: Vec<u32> },
    Shutdown,
}

impl Request {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }
}

#[derive(Debug, Deserialize)]
struct PlannerResponse {
    weights: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
struct StepResponse {
    logits: Vec<f64>,
}

/// Spawn-time options for [`ExternalScorer`].
#[derive(Debug, Clone)]
pub struct ExternalScorerOptions {
    /// Per-request timeout; default 30 s.
    pub timeout: Duration,
    /// Number of child processes; one in-flight request per process.
    pub pool_size: usize,
}

impl Default for ExternalScorerOptions {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(30),
            pool_size: 1,
        }
    }
}

struct Worker {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
}

/// Scorer backed by one or more child processes.
pub struct ExternalScorer {
    workers: Vec<Mutex<Worker>>,
    next: AtomicUsize,
    docid_vocab: u32,
    timeout: Duration,
}

impl ExternalScorer {
    /// Spawn the command line (split on whitespace; the first token is the
    /// program). `docid_vocab` is the expected logits length V.
    pub fn spawn(
        command_line: &str,
        docid_vocab: u32,
        options: ExternalScorerOptions,
    ) -> Result<Self> {
        let parts: Vec<&str> = command_line.split_whitespace().collect();
        let (program, args) = parts
            .split_first()
            .ok_or_else(|| Error::InvalidArgument("empty scorer command".into()))?;
        if options.pool_size == 0 {
            return Err(Error::InvalidArgument("pool_size must be >= 1".into()));
        }
        let mut workers = Vec::with_capacity(options.pool_size);
        for _ in 0..options.pool_size {
            let mut child = Command::new(program)
                .args(args)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .spawn()
                .map_err(|e| Error::Scorer(format!("failed to spawn '{program}': {e}")))?;
            let stdin = child.stdin.take().expect("piped stdin");
            let stdout = child.stdout.take().expect("piped stdout");
            let (tx, rx) = mpsc::channel();
            thread::spawn(move || {
                let mut reader = BufReader::new(stdout);
                loop {
                    let mut line = String::new();
                    match reader.read_line(&mut line) {
                        Ok(0) => break,
                        Ok(_) => {
                            if tx.send(Ok(line)).is_err() {
                                break;
                            }
                        }
                        Err(e) => {
                            let _ = tx.send(Err(e));
                            break;
                        }
                    }
                }
            });
            workers.push(Mutex::new(Worker {
                child,
                stdin: Some(stdin),
                lines: rx,
            }));
        }
        Ok(Self {
            workers,
            next: AtomicUsize::new(0),
            docid_vocab,
            timeout: options.timeout,
        })
    }

    fn roundtrip(&self, request: &Request) -> Result<String> {
        let line = request.to_line();
        let idx = self.next.fetch_add(1, Ordering::Relaxed) % self.workers.len();
        let mut worker = self.workers[idx].lock().expect("worker lock");
        let stdin = worker.stdin.as_mut().ok_or_else(|| Error::Protocol {
            msg: "scorer process already shut down".into(),
            request: line.clone(),
        })?;
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::Protocol {
                msg: format!("write to scorer process failed: {e}"),
                request: line.clone(),
            })?;
        match worker.lines.recv_timeout(self.timeout) {
            Ok(Ok(response)) => Ok(response),
            Ok(Err(e)) => Err(Error::Protocol {
                msg: format!("read from scorer process failed: {e}"),
                request: line,
            }),
            Err(RecvTimeoutError::Timeout) => Err(Error::Protocol {
                msg: format!("timed out after {:?}", self.timeout),
                request: line,
            }),
            Err(RecvTimeoutError::Disconnected) => Err(Error::Protocol {
                msg: "scorer process exited".into(),
                request: line,
            }),
        }
    }
}

impl Scorer for ExternalScorer {
    fn planner_weights(&self, query: &Query) -> Result<PlannerWeights> {
        let request = Request::Planner {
            qid: query.qid.clone(),
            text: query.text.clone(),
        };
        let line = self.roundtrip(&request)?;
        let parsed: PlannerResponse =
            serde_json::from_str(line.trim()).map_err(|e| Error::Protocol {
                msg: format!("malformed planner response: {e}"),
                request: request.to_line(),
            })?;
        let mut weights = PlannerWeights::new();
        for (token, w) in parsed.weights {
            let token: u32 = token.parse().map_err(|_| Error::Protocol {
                msg: format!("bad planner token key '{token}'"),
                request: request.to_line(),
            })?;
            if !w.is_finite() {
                return Err(Error::Protocol {
                    msg: format!("non-finite planner weight {w}"),
                    request: request.to_line(),
                });
            }
            weights.insert(token, w);
        }
        Ok(weights)
    }

    fn step_logits(&self, query: &Query, prefix: &[u32]) -> Result<StepLogits> {
        let request = Request::Step {
            qid: query.qid.clone(),
            text: query.text.clone(),
            prefix: prefix.to_vec(),
        };
        let line = self.roundtrip(&request)?;
        let parsed: StepResponse =
            serde_json::from_str(line.trim()).map_err(|e| Error::Protocol {
                msg: format!("malformed step response: {e}"),
                request: request.to_line(),
            })?;
        validate_logits(&parsed.logits, self.docid_vocab, &request.to_line())?;
        Ok(parsed.logits)
    }
}

impl Drop for ExternalScorer {
    fn drop(&mut self) {
        for worker in &self.workers {
            let Ok(mut worker) = worker.lock() else {
                continue;
            };
            if let Some(mut stdin) = worker.stdin.take() {
                let _ = stdin.write_all(Request::Shutdown.to_line().as_bytes());
                let _ = stdin.write_all(b"\n");
                let _ = stdin.flush();
            }
            // Give the child a moment to exit cleanly, then kill.
            let mut exited = false;
            for _ in 0..50 {
                match worker.child.try_wait() {
                    Ok(Some(_)) => {
                        exited = true;
                        break;
                    }
                    Ok(None) => thread::sleep(Duration::from_millis(10)),
                    Err(_) => break,
                }
            }
            if !exited {
                let _ = worker.child.kill();
                let _ = worker.child.wait();
            }
        }
    }
}
