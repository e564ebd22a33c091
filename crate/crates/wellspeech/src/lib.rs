//! Command-line pipeline around `wellspeech-core`: corpus files, model
//! backends, and the evaluation report bundle.

pub mod corpus_io;
pub mod gateway;
pub mod pipeline;
pub mod synth_io;
pub mod wer_io;
