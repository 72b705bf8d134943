//! Allocation-only core of the mtforge corpus toolkit.
//!
//! Everything in this crate is a pure function of its inputs: language
//! metadata, direction enumeration, hash-threshold downsampling, prompt
//! rendering, bitext filtering, synthesis planning against a pluggable
//! backend, evaluation aggregation and repetition diagnostics. IO, process
//! management and the command line live in the `mtforge` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod diagnostics;
pub mod direction;
pub mod downsample;
pub mod eval;
pub mod filter;
pub mod hash;
pub mod lang;
pub mod mixture;
pub mod prompt;
pub mod record;
pub mod synth;

pub use direction::{enumerate_directions, expand, Direction, DirectionSet};
pub use downsample::{classify, DirectionClass, RetentionPolicy};
pub use lang::{Language, Registry, RegistryError, Tier};
pub use record::{DirectionalExample, MultiWayRecord, Provenance, ScoredPair};

/// The two center languages every supported direction touches.
pub const CENTERS: [&str; 2] = ["en", "zh"];

/// Returns true for `en` and `zh`.
#[inline]
pub fn is_center(code: &str) -> bool {
    CENTERS.contains(&code)
}
