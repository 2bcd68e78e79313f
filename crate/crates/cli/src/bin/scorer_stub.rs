//! Test stub speaking the external-scorer protocol on stdin/stdout.
//!
//! Modes:
//!   --zeros V        respond with V zero logits and empty planner weights
//!   --short V        respond with V-1 logits (protocol-violation probe)
//!   --replay FILE    respond from a JSONL recording of request/response lines
//!   --hang           accept requests but never respond (timeout probe)
//!
//! A `{"op":"shutdown"}` line exits with status 0 in every mode.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

#[derive(serde::Deserialize)]
struct RecordedExchange {
    request: String,
    response: String,
}

enum Mode {
    Zeros(usize),
    Short(usize),
    Replay(HashMap<String, String>),
    Hang,
}

fn parse_mode() -> Result<Mode, String> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("--zeros") => Ok(Mode::Zeros(parse_count(&args)?)),
        Some("--short") => Ok(Mode::Short(parse_count(&args)?)),
        Some("--hang") => Ok(Mode::Hang),
        Some("--replay") => {
            let path = args
                .get(1)
                .ok_or_else(|| "--replay needs a file".to_string())?;
            let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
            let mut map = HashMap::new();
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let exchange: RecordedExchange =
                    serde_json::from_str(line).map_err(|e| e.to_string())?;
                map.insert(exchange.request, exchange.response);
            }
            Ok(Mode::Replay(map))
        }
        other => Err(format!("unknown mode {other:?}")),
    }
}

fn parse_count(args: &[String]) -> Result<usize, String> {
    args.get(1)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| "expected a vocabulary size".to_string())
}

fn main() {
    let mode = match parse_mode() {
        Ok(mode) => mode,
        Err(msg) => {
            eprintln!("scorer-stub: {msg}");
            std::process::exit(2);
        }
    };
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for line in stdin.lock().lines() {
        let line = match line {
            Ok(l) => l,
            Err(_) => break,
        };
        if line.trim().is_empty() {
            continue;
        }
        let parsed: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let op = parsed.get("op").and_then(|v| v.as_str()).unwrap_or("");
        if op == "shutdown" {
            std::process::exit(0);
        }
        let response = match &mode {
            Mode::Hang => continue,
            Mode::Zeros(v) | Mode::Short(v) => {
                let v = match &mode {
                    Mode::Short(v) => v.saturating_sub(1),
                    _ => *v,
                };
                match op {
                    "planner" => r#"{"weights":{}}"#.to_string(),
                    "step" => {
                        let zeros = vec!["0.0"; v].join(",");
                        format!(r#"{{"logits":[{zeros}]}}"#)
                    }
                    _ => continue,
                }
            }
            Mode::Replay(map) => match map.get(&line) {
                Some(r) => r.clone(),
                None => {
                    eprintln!("scorer-stub: no recording for request: {line}");
                    std::process::exit(3);
                }
            },
        };
        if writeln!(out, "{response}").and_then(|_| out.flush()).is_err() {
            break;
        }
    }
}
