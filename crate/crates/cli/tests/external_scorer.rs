//! External-scorer protocol tests against the `plangr-scorer-stub` binary:
//! happy path, validation failures, timeouts, and a record/replay harness
//! proving wire-level equivalence with the in-process scorer.

use std::sync::Mutex;
use std::time::Duration;

use plangr_core::corpus::Query;
use plangr_core::decode::{decode, DecodeOptions, FinalScore};
use plangr_core::error::{Error, Result};
use plangr_core::fixtures::trap_fixture;
use plangr_core::planner::{plan, PlanningSet};
use plangr_core::scorer::{
    ExternalScorer, ExternalScorerOptions, PlannerWeights, Request, Scorer, StepLogits,
    SyntheticScorer,
};
use plangr_core::trie::build_trie;

fn stub_command(args: &str) -> String {
    format!("{} {args}", env!("CARGO_BIN_EXE_plangr-scorer-stub"))
}

fn spawn(args: &str, vocab: u32) -> ExternalScorer {
    ExternalScorer::spawn(&stub_command(args), vocab, ExternalScorerOptions::default()).unwrap()
}

#[test]
fn zero_stub_decodes_with_all_zero_scores() {
    let trap = trap_fixture();
    let trie = build_trie(&trap.corpus).unwrap();
    let scorer = spawn("--zeros 3", 3);
    let planning = PlanningSet::empty();
    let options = DecodeOptions {
        beam_size: 4,
        use_bonus: false,
        plan_override: None,
        output_depth: 4,
        final_score: FinalScore::Combined,
    };
    let run = decode(&trap.clean, &trie, &scorer, &planning, &options).unwrap();
    assert_eq!(run.len(), 4);
    assert!(run.entries().iter().all(|e| e.score == 0.0));
    // All-zero scores fall back to ascending doc_id order.
    let ids: Vec<&str> = run.entries().iter().map(|e| e.doc_id.as_str()).collect();
    assert_eq!(ids, vec!["docA", "docB", "docR", "docX"]);
}

#[test]
fn short_response_is_a_protocol_error_naming_lengths() {
    let scorer = spawn("--short 3", 3);
    let q = Query::new("q1", "text");
    let err = scorer.step_logits(&q, &[]).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("expected 3 logits, got 2"), "got: {msg}");
    assert!(msg.contains("\"op\":\"step\""), "echoes the request: {msg}");
}

#[test]
fn hanging_process_times_out() {
    let scorer = ExternalScorer::spawn(
        &stub_command("--hang"),
        3,
        ExternalScorerOptions {
            timeout: Duration::from_millis(200),
            pool_size: 1,
        },
    )
    .unwrap();
    let q = Query::new("q1", "text");
    let err = scorer.step_logits(&q, &[]).unwrap_err();
    assert!(err.to_string().contains("timed out"), "got: {err}");
}

#[test]
fn pool_of_two_processes_works() {
    let scorer = ExternalScorer::spawn(
        &stub_command("--zeros 3"),
        3,
        ExternalScorerOptions {
            timeout: Duration::from_secs(5),
            pool_size: 2,
        },
    )
    .unwrap();
    let q = Query::new("q1", "text");
    for _ in 0..6 {
        assert_eq!(scorer.step_logits(&q, &[1]).unwrap(), vec![0.0; 3]);
    }
}

/// Delegating scorer that records every exchange as protocol lines.
struct RecordingScorer {
    inner: SyntheticScorer,
    log: Mutex<Vec<(String, String)>>,
}

impl Scorer for RecordingScorer {
    fn planner_weights(&self, query: &Query) -> Result<PlannerWeights> {
        let weights = self.inner.planner_weights(query)?;
        let request = Request::Planner {
            qid: query.qid.clone(),
            text: query.text.clone(),
        };
        let map: std::collections::BTreeMap<String, f64> =
            weights.iter().map(|(t, w)| (t.to_string(), w)).collect();
        let response = serde_json::json!({ "weights": map }).to_string();
        self.log.lock().unwrap().push((request.to_line(), response));
        Ok(weights)
    }

    fn step_logits(&self, query: &Query, prefix: &[u32]) -> Result<StepLogits> {
        let logits = self.inner.step_logits(query, prefix)?;
        let request = Request::Step {
            qid: query.qid.clone(),
            text: query.text.clone(),
            prefix: prefix.to_vec(),
        };
        let response = serde_json::json!({ "logits": logits }).to_string();
        self.log.lock().unwrap().push((request.to_line(), response));
        Ok(logits)
    }
}

#[test]
fn replayed_recording_reproduces_the_in_process_run() {
    // Record a full plan+decode with the synthetic scorer.
    let corpus = plangr_core::corpus::generate_synthetic_corpus(
        plangr_core::corpus::SyntheticSpec {
            num_docs: 16,
            config: plangr_core::corpus::CorpusConfig {
                seq_len: 3,
                docid_vocab: 4,
                planner_vocab: 32,
                set_size: 4,
            },
            vector_dim: 6,
            seed: 11,
        },
    )
    .unwrap()
    .0;
    let trie = build_trie(&corpus).unwrap();
    let queries = plangr_core::fixtures::synthetic_queries(3, 900);
    let recorder = RecordingScorer {
        inner: SyntheticScorer::new(11, 4, 32),
        log: Mutex::new(Vec::new()),
    };
    let options = DecodeOptions::new(4, 4);
    let mut recorded_runs = Vec::new();
    for q in &queries {
        let planning = plan(q, &corpus, &recorder, 16).unwrap();
        recorded_runs.push(decode(q, &trie, &recorder, &planning, &options).unwrap());
    }

    // Write the recording and replay it through the child process.
    let dir = tempfile::tempdir().unwrap();
    let recording = dir.path().join("recording.jsonl");
    let mut lines = String::new();
    for (request, response) in recorder.log.lock().unwrap().iter() {
        lines.push_str(
            &serde_json::json!({ "request": request, "response": response }).to_string(),
        );
        lines.push('\n');
    }
    std::fs::write(&recording, lines).unwrap();

    let external = spawn(&format!("--replay {}", recording.display()), 4);
    for (q, want) in queries.iter().zip(&recorded_runs) {
        let planning = plan(q, &corpus, &external, 16).unwrap();
        let got = decode(q, &trie, &external, &planning, &options).unwrap();
        assert_eq!(&got, want, "replayed run differs for {}", q.qid);
    }
}

#[test]
fn empty_command_is_rejected() {
    match ExternalScorer::spawn("   ", 3, ExternalScorerOptions::default()) {
        Err(err) => assert!(matches!(err, Error::InvalidArgument(_)), "got: {err}"),
        Ok(_) => panic!("empty command accepted"),
    }
}
