//! Static-analysis-guided unit test generation for Java and Python.
//!
//! The crate is organised along the generation flow: [`code_model`] parses
//! sources, [`analysis`] gathers focal context, [`prompting`] renders
//! prompts, [`llm`] talks to a chat-completion model, and [`pipeline`]
//! sanitizes, repairs and extends the generated tests. [`naturalness`]
//! scores test suites independently of generation.

pub mod analysis;
pub mod code_model;
pub mod llm;
pub mod naturalness;
pub mod pipeline;
pub mod prompting;
