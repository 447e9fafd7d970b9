//! Trial record CSV ingestion.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::cascade::TestProfile;

use super::{ConfigError, Strictness};

const PLATFORM: &str = "platform";
const TEST: &str = "test";
const TRIAL_ID: &str = "trial_id";
const NOTES: &str = "notes";

/// One raw trial: identifying columns plus one value per schema field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub platform: String,
    pub test: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub values: BTreeMap<String, f64>,
    /// 1-based line number in the source file.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    pub line: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.column {
            Some(col) => write!(f, "line {}, column {col:?}: {}", self.line, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordSet {
    pub records: Vec<TrialRecord>,
    /// Rows dropped in lenient mode.
    pub row_errors: Vec<RowError>,
    pub warnings: Vec<String>,
}

/// Reads trial records for `profile`.
///
/// The header must hold `platform`, `test`, optionally `trial_id` and
/// `notes`, and exactly the profile's record fields. Each row's `test`
/// must name the profile. Strict mode rejects the file on any bad row;
/// lenient mode keeps the good rows and reports the rest.
pub fn load_records(text: &str, profile: &TestProfile, strictness: Strictness) -> Result<RecordSet, ConfigError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| ConfigError::Header(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let layout = Layout::from_header(&header, profile)?;

    let mut set = RecordSet::default();
    for row in reader.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                set.row_errors.push(RowError {
                    line,
                    column: None,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line() as usize);
        match layout.parse_row(&row, &header, line, profile.name()) {
            Ok(record) => set.records.push(record),
            Err(errors) => set.row_errors.extend(errors),
        }
    }

    if strictness == Strictness::Strict && !set.row_errors.is_empty() {
        return Err(ConfigError::Rows(set.row_errors));
    }
    if set.records.is_empty() && set.row_errors.is_empty() {
        set.warnings.push("no data rows".into());
    }
    Ok(set)
}

struct Layout {
    platform: usize,
    test: usize,
    trial_id: Option<usize>,
    notes: Option<usize>,
    fields: Vec<(usize, String)>,
}

impl Layout {
    fn from_header(header: &[String], profile: &TestProfile) -> Result<Self, ConfigError> {
        let find = |name: &str| header.iter().position(|h| h == name);
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = header.iter().find(|h| !seen.insert(h.as_str())) {
            return Err(ConfigError::Header(format!("duplicate column {dup:?}")));
        }
        let platform = find(PLATFORM).ok_or_else(|| ConfigError::Header("missing column \"platform\"".into()))?;
        let test = find(TEST).ok_or_else(|| ConfigError::Header("missing column \"test\"".into()))?;
        let mut fields = Vec::new();
        for name in profile.field_names() {
            let idx = find(name).ok_or_else(|| {
                ConfigError::Header(format!(
                    "missing column {name:?} required by profile {}",
                    profile.name()
                ))
            })?;
            fields.push((idx, name.to_string()));
        }
        let reserved = [PLATFORM, TEST, TRIAL_ID, NOTES];
        if let Some(extra) = header
            .iter()
            .find(|h| !reserved.contains(&h.as_str()) && !profile.field_names().any(|f| f == h.as_str()))
        {
            return Err(ConfigError::Header(format!(
                "column {extra:?} is not a field of profile {}",
                profile.name()
            )));
        }
        Ok(Self {
            platform,
            test,
            trial_id: find(TRIAL_ID),
            notes: find(NOTES),
            fields,
        })
    }

    fn parse_row(
        &self,
        row: &csv::StringRecord,
        header: &[String],
        line: usize,
        profile: &str,
    ) -> Result<TrialRecord, Vec<RowError>> {
        if row.len() != header.len() {
            return Err(vec![RowError {
                line,
                column: None,
                message: format!("{} cells, header has {}", row.len(), header.len()),
            }]);
        }
        let mut errors = Vec::new();
        let err = |column: &str, message: String| RowError {
            line,
            column: Some(column.to_string()),
            message,
        };
        let platform = row[self.platform].to_string();
        if platform.is_empty() {
            errors.push(err(PLATFORM, "empty platform id".into()));
        }
        let test = row[self.test].to_string();
        if test != profile {
            errors.push(err(TEST, format!("test {test:?} does not match profile {profile:?}")));
        }
        let mut values = BTreeMap::new();
        for (idx, name) in &self.fields {
            let cell = &row[*idx];
            if cell.is_empty() {
                errors.push(err(name, "missing value".into()));
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    values.insert(name.clone(), v);
                }
                Ok(v) => errors.push(err(name, format!("value {v} is not finite"))),
                Err(_) => errors.push(err(name, format!("{cell:?} is not a number"))),
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        let optional = |idx: Option<usize>| idx.map(|i| row[i].to_string()).filter(|s| !s.is_empty());
        Ok(TrialRecord {
            platform,
            test,
            trial_id: optional(self.trial_id),
            notes: optional(self.notes),
            values,
            line,
        })
    }
}
