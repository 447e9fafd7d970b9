//! Parallel scoring of trial records.

use rayon::prelude::*;

use crate::cascade::{AxisScores, CascadeError, TestProfile};
use crate::io::{RecordScore, TrialRecord};

/// Scores every record on `workers` threads (0 means rayon's default).
/// Results keep input order whatever the worker count.
pub fn evaluate_records(
    profile: &TestProfile,
    records: &[TrialRecord],
    workers: usize,
) -> Vec<Result<AxisScores, CascadeError>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(|| {
        records
            .par_iter()
            .map(|r| profile.evaluate(r.values.iter().map(|(k, v)| (k, *v))))
            .collect()
    })
}

/// Like [`evaluate_records`], pairing each success with its record's ids.
pub fn score_records(
    profile: &TestProfile,
    records: &[TrialRecord],
    workers: usize,
) -> Result<Vec<RecordScore>, (usize, CascadeError)> {
    evaluate_records(profile, records, workers)
        .into_iter()
        .zip(records)
        .map(|(result, r)| {
            result
                .map(|scores| RecordScore {
                    platform: r.platform.clone(),
                    test: r.test.clone(),
                    trial_id: r.trial_id.clone(),
                    scores,
                })
                .map_err(|e| (r.line, e))
        })
        .collect()
}
