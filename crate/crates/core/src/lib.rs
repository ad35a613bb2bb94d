//! Type annotations for Python code from a language model, kept honest by
//! mypy: generate, check, repair, and score against ground truth.

pub mod checker;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod cst;
pub mod error;
pub mod eval;
pub mod llm;
pub mod pipeline;
pub mod prompt;
pub mod python;
pub mod sync;

pub use error::{Error, Result};
