//! Benchmark harness for multi-condition requests over tabular knowledge.
//!
//! The pipeline: load a [`relation::Relation`], render it at a
//! [`structurer::StructuringLevel`], sample condition expressions with
//! [`condgen`], instantiate prompts with [`requestgen`], compute gold answers
//! with the relational [`oracle`], query a model through [`gateway`], parse
//! replies with [`answer`] and score them with [`evaluator`].

pub mod answer;
pub mod cli;
pub mod condgen;
pub mod dataset;
pub mod evaluator;
pub mod fixtures;
pub mod gateway;
pub mod manifest;
pub mod oracle;
pub mod relation;
pub mod requestgen;
pub mod seed;
pub mod structurer;
pub mod synth;
