//! Directed word-collocation networks built from longitudinal
//! child/caretaker transcripts.
//!
//! Transcripts in a CHAT subset are parsed into [`corpus::Session`]s;
//! spontaneous utterances become [`graph::LexicalNetwork`]s where each word
//! form is a node and each adjacent word pair within an utterance is an arc.
//! Networks are built either accumulatively (all visits so far) or per MLU
//! stage, and analysed for size, average degree, hub/authority weights,
//! egonets and the child/mother comparison.

pub mod analysis;
pub mod builder;
pub mod centrality;
pub mod corpus;
pub mod error;
pub mod graph;
pub mod io;
pub mod stages;

pub use error::{Error, Result};
