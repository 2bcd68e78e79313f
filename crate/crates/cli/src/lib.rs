//! Operator-facing harness around `plangr-core`: config management,
//! experiment orchestration, benchmarking, and report emission.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod pipeline;

use plangr_core::Error;

/// Exit code policy: 0 success, 1 validation error, 2 I/O error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 2,
        _ => 1,
    }
}
