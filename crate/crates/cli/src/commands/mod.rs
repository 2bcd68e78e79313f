//! Command implementations behind the CLI surface.

pub mod bench;
pub mod build;
pub mod decode;
pub mod diagnose;
pub mod evaluate;
pub mod perturb;
pub mod plan;
pub mod report;
pub mod truncate_m;
