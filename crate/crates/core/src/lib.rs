//! History attentive dense retrieval for conversational search.
//!
//! A question at turn `k` is encoded once per attended history turn `i` as
//! `[CLS] q_1 [SEP] q_i [SEP] q_k`. Softmax attention over the per-row `[CLS]`
//! vectors weighs the rows, and either the `[CLS]` vectors (coarse) or the
//! `q_k` token vectors (fine) are combined into one dense query that is
//! scored against offline passage vectors by inner product.
//!
//! Modules follow the pipeline order: [`corpus`] → [`batching`] →
//! [`encoder`] → [`har`] → [`index`] → [`training`] → [`eval`], with
//! [`pipeline`] wiring them for the `har` command-line tool.

pub mod batching;
pub mod corpus;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod har;
pub mod index;
pub mod linalg;
pub mod pipeline;
pub mod training;

pub use error::{HarError, Result};
