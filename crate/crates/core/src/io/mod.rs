//! Profile documents, trial records, score matrices and report emission.
//!
//! Every diagnostic carries a location: a JSON pointer for profile
//! documents, a line and column for CSV inputs.

mod matrix;
mod profile;
mod records;
mod report;
mod surface;

use std::fmt;

use thiserror::Error;

use crate::aggregate::AggregateError;

pub use matrix::{
    emit_score_matrix_csv, parse_score_matrix, parse_score_matrix_csv, parse_score_matrix_json, parse_weights_csv,
};
pub use profile::{
    parse_profile, parse_profile_document, serialize_profile, CascadeDoc, FisDoc, GenerateDoc, GenerateMode,
    MetadataDoc, NodeDoc, ProfileDocument, RuleDoc, RulesDoc, TermDoc, VariableDoc, SCHEMA_VERSION,
};
pub use records::{load_records, RecordSet, RowError, TrialRecord};
pub use report::{emit_report, summarize, RecordScore, Report, ReportDocuments, TestMean};
pub use surface::{emit_surface_csv, parse_surface_csv};

/// How to treat recoverable problems: fail (strict) or warn and continue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    #[default]
    Strict,
    Lenient,
}

/// A parsed value together with the warnings raised in lenient mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema version {found} is not supported (expected {expected})")]
    Version { found: String, expected: u32 },
    #[error("{}: {message}", display_pointer(.path))]
    Invalid { path: String, message: String },
    #[error("{}", join_lines(.0))]
    Unknown(Vec<String>),
    #[error("header: {0}")]
    Header(String),
    #[error("{}", join_rows(.0))]
    Rows(Vec<RowError>),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
}

fn display_pointer(path: &str) -> &str {
    if path.is_empty() {
        "/"
    } else {
        path
    }
}

fn join_lines(items: &[String]) -> String {
    items.join("\n")
}

fn join_rows(rows: &[RowError]) -> String {
    rows.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

/// Escapes one JSON pointer reference token.
pub(crate) fn pointer_token(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

pub(crate) struct Pointer<'a>(pub &'a [&'a dyn fmt::Display]);

impl fmt::Display for Pointer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for part in self.0 {
            write!(f, "/{}", pointer_token(&part.to_string()))?;
        }
        Ok(())
    }
}

/// Fixed six-decimal rendering used by every CSV report.
pub(crate) fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    // Avoid "-0.000000" for tiny negatives and negative zero.
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}
