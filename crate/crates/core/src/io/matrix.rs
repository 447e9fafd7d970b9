//! Score matrix and weight files.
//!
//! CSV matrix: header `platform,<test>,...`, one row per platform, `NA`
//! for a test the platform did not run. JSON matrix:
//! `{"tests": [...], "platforms": [{"id": "A", "scores": [0.9, null]}]}`.

use serde::Deserialize;

use crate::aggregate::{ScoreMatrix, WeightVector};

use super::{fmt6, ConfigError, RowError};

pub const MISSING: &str = "NA";

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

pub fn parse_score_matrix_csv(text: &str) -> Result<ScoreMatrix, ConfigError> {
    let mut rdr = reader(text);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| ConfigError::Header(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.first().map(String::as_str) != Some("platform") {
        return Err(ConfigError::Header("first column must be \"platform\"".into()));
    }
    let tests = header[1..].to_vec();
    if tests.is_empty() {
        return Err(ConfigError::Header("no test columns".into()));
    }

    let mut platforms = Vec::new();
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| ConfigError::Header(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != header.len() {
            errors.push(RowError {
                line,
                column: None,
                message: format!("{} cells, header has {}", row.len(), header.len()),
            });
            continue;
        }
        let mut values = Vec::with_capacity(tests.len());
        for (cell, test) in row.iter().skip(1).zip(&tests) {
            if cell == MISSING {
                values.push(None);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(Some(v)),
                _ => errors.push(RowError {
                    line,
                    column: Some(test.clone()),
                    message: format!("{cell:?} is neither a number nor {MISSING}"),
                }),
            }
        }
        platforms.push(row[0].to_string());
        entries.push(values);
    }
    if !errors.is_empty() {
        return Err(ConfigError::Rows(errors));
    }
    Ok(ScoreMatrix::new(platforms, tests, entries)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    tests: Vec<String>,
    platforms: Vec<PlatformDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlatformDoc {
    id: String,
    scores: Vec<Option<f64>>,
}

pub fn parse_score_matrix_json(text: &str) -> Result<ScoreMatrix, ConfigError> {
    let doc: MatrixDoc = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let (platforms, entries) = doc.platforms.into_iter().map(|p| (p.id, p.scores)).unzip();
    Ok(ScoreMatrix::new(platforms, doc.tests, entries)?)
}

/// Chooses the format from the first non-blank character.
pub fn parse_score_matrix(text: &str) -> Result<ScoreMatrix, ConfigError> {
    if text.trim_start().starts_with('{') {
        parse_score_matrix_json(text)
    } else {
        parse_score_matrix_csv(text)
    }
}

pub fn emit_score_matrix_csv(matrix: &ScoreMatrix) -> String {
    let mut out = String::from("platform");
    for t in matrix.tests() {
        out.push(',');
        out.push_str(t);
    }
    out.push('\n');
    for (p, row) in matrix.rows() {
        out.push_str(p);
        for v in row {
            out.push(',');
            match v {
                Some(v) => out.push_str(&fmt6(*v)),
                None => out.push_str(MISSING),
            }
        }
        out.push('\n');
    }
    out
}

/// `test,weight` rows.
pub fn parse_weights_csv(text: &str) -> Result<WeightVector, ConfigError> {
    let mut rdr = reader(text);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| ConfigError::Header(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != ["test", "weight"] {
        return Err(ConfigError::Header("expected columns test,weight".into()));
    }
    let mut pairs = Vec::new();
    let mut errors = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| ConfigError::Header(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != 2 {
            errors.push(RowError {
                line,
                column: None,
                message: format!("{} cells, expected 2", row.len()),
            });
            continue;
        }
        match row[1].parse::<f64>() {
            Ok(w) => pairs.push((row[0].to_string(), w)),
            Err(_) => errors.push(RowError {
                line,
                column: Some("weight".into()),
                message: format!("{:?} is not a number", &row[1]),
            }),
        }
    }
    if !errors.is_empty() {
        return Err(ConfigError::Rows(errors));
    }
    Ok(WeightVector::new(pairs)?)
}
