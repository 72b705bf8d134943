//! Streaming IO, subprocess protocols and the `mtforge` command line on
//! top of `mtforge-core`.

pub mod cli;
pub mod config;
pub mod io;
pub mod pipeline;
pub mod process;

pub use io::{load_registry, read_multiway, read_scores, write_examples, CorpusError};
pub use process::{ExternalScorer, LineProcess, ProtocolError, SubprocessBackend};
