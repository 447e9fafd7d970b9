//! Cascaded fuzzy inference for scoring robot test trials.
//!
//! Raw trial measurements are fuzzified by per-axis Sugeno systems, the
//! axis scores are combined by a terminal system, and per-test scores
//! are aggregated across tests with a weighted product.

pub mod aggregate;
pub mod batch;
pub mod cascade;
pub mod fis;
pub mod io;
