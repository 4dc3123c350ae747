//! Probing harness for visual-semantic embeddings.
//!
//! The crate builds three classification datasets from an annotated
//! image-caption corpus (object categories, binned object counts and
//! semantic congruence of captions), trains small probes on frozen
//! embedding vectors and renders accuracy reports.
//!
//! Module map:
//!
//! - [`corpus`]: COCO-style annotation ingestion, split files and a
//!   deterministic synthetic corpus generator.
//! - [`embeddings`]: embedding manifests and merged (average / concatenated)
//!   text+image variants.
//! - [`tamper`]: head-word replacement pipeline producing incongruent
//!   captions (parse ingestion, Lesk disambiguation, lexicon lookup,
//!   inflection, sentence scoring).
//! - [`tasks`]: the three probing datasets and the majority baseline.
//! - [`probes`]: linear-softmax and one-hidden-layer MLP probes with
//!   hand-written backpropagation and Adam.
//! - [`eval`]: accuracies, multi-run aggregation and report emission.
//! - [`synthetic`]: template-caption parses, a matching lexicon and toy
//!   encoders for running the pipeline without external resources.
//! - [`cli`]: the `vsprobe` command-line driver.

pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod manifest;
pub mod probes;
pub mod seed;
pub mod synthetic;
pub mod tamper;
pub mod tasks;
pub mod text;

pub use error::{Error, Result};
