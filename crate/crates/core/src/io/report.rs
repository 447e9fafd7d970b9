//! CSV and JSON score reports.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::aggregate::Ranking;
use crate::cascade::AxisScores;

use super::fmt6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordScore {
    pub platform: String,
    pub test: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial_id: Option<String>,
    #[serde(flatten)]
    pub scores: AxisScores,
}

/// Mean final score over the trials of one platform on one test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestMean {
    pub platform: String,
    pub test: String,
    pub trials: usize,
    pub mean_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Report {
    pub records: Vec<RecordScore>,
    pub test_means: Vec<TestMean>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Ranking>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportDocuments {
    /// `platform,test,ec,mc,hi,final`, one row per record in input order.
    pub records_csv: String,
    /// `platform,test,trials,mean_final`, sorted by platform then test.
    pub means_csv: String,
    /// `rank,platform,score,tests_present` when the report has a ranking.
    pub ranking_csv: Option<String>,
    /// The whole report at full precision.
    pub json: String,
}

/// Per-platform, per-test arithmetic means of the final scores.
pub fn summarize(records: &[RecordScore]) -> Vec<TestMean> {
    let mut groups: BTreeMap<(&str, &str), (f64, usize)> = BTreeMap::new();
    for r in records {
        let entry = groups.entry((&r.platform, &r.test)).or_default();
        entry.0 += r.scores.final_score;
        entry.1 += 1;
    }
    groups
        .into_iter()
        .map(|((platform, test), (sum, n))| TestMean {
            platform: platform.to_string(),
            test: test.to_string(),
            trials: n,
            mean_final: sum / n as f64,
        })
        .collect()
}

fn csv_document(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn emit_report(report: &Report) -> ReportDocuments {
    let records_csv = csv_document(
        &["platform", "test", "ec", "mc", "hi", "final"],
        report.records.iter().map(|r| {
            vec![
                r.platform.clone(),
                r.test.clone(),
                fmt6(r.scores.ec),
                fmt6(r.scores.mc),
                fmt6(r.scores.hi),
                fmt6(r.scores.final_score),
            ]
        }),
    );
    let means_csv = csv_document(
        &["platform", "test", "trials", "mean_final"],
        report.test_means.iter().map(|m| {
            vec![
                m.platform.clone(),
                m.test.clone(),
                m.trials.to_string(),
                fmt6(m.mean_final),
            ]
        }),
    );
    let ranking_csv = report.ranking.as_ref().map(|ranking| {
        csv_document(
            &["rank", "platform", "score", "tests_present"],
            ranking.overall.iter().map(|p| {
                vec![
                    p.rank.to_string(),
                    p.platform.clone(),
                    fmt6(p.score),
                    p.tests_present.to_string(),
                ]
            }),
        )
    });
    let mut json = serde_json::to_string_pretty(report).expect("reports serialize");
    json.push('\n');
    ReportDocuments {
        records_csv,
        means_csv,
        ranking_csv,
        json,
    }
}
