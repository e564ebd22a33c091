//! Algorithms for zero-shot psychological well-being scoring of speech
//! transcripts: prompt construction, model-output parsing and validation,
//! keyword grounding, correlation statistics, retention curves, word error
//! rate, and seeded synthetic data.
//!
//! The crate is `no_std` and needs only `alloc`; file formats, networking,
//! and the command line live in the `wellspeech` crate.

#![no_std]

extern crate alloc;

pub mod assessment;
pub mod corpus;
pub mod dimension;
pub mod hash;
pub mod metrics;
pub mod mock;
pub mod prompting;
pub mod synth;
pub mod text;
pub mod wer;

pub use dimension::DimensionName;
