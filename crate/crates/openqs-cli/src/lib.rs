//! Library surface of the experiment driver; the `openq` binary is a thin
//! wrapper around these modules.

pub mod config;
pub mod experiments;
pub mod output;
pub mod specs;
