//! Core library for a numerical-claim verification pipeline.
//!
//! The pipeline decomposes a claim into sub-questions, retrieves evidence
//! with BM25, reranks the candidates, assembles a budgeted input string,
//! and classifies the claim as True / False / Conflicting. An evaluation
//! harness computes per-class F1, macro-F1, and runs the ablation grid
//! over digit-tokenization modes and context budgets.

pub mod classify;
pub mod config;
pub mod corpus;
pub mod decompose;
pub mod error;
pub mod eval;
pub mod http;
pub mod rerank;
pub mod retrieval;
pub mod tokenize;

pub use error::{Error, Result};
