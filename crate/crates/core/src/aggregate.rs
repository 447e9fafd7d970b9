//! Overall scores from per-test scores: a weighted product `Π φᵢ^wᵢ`.
//!
//! Weights are renormalized over the tests a platform actually has, so
//! with equal weights the overall score is the geometric mean of the
//! present scores.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregateError {
    #[error("score matrix: {0}")]
    Shape(String),
    #[error("{platform}/{test}: score {value} outside [0, 1]")]
    OutOfRange { platform: String, test: String, value: f64 },
    #[error("{platform}: every test is missing")]
    AllMissing { platform: String },
    #[error("{platform}: test {test} is missing (strict mode)")]
    Missing { platform: String, test: String },
    #[error("{platform}/{test}: score {value} must be positive (pass allow-zero to accept zeros)")]
    NonPositive { platform: String, test: String, value: f64 },
    #[error("weights: {0}")]
    Weights(String),
}

/// Platforms × tests, with `None` for tests a platform did not run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    platforms: Vec<String>,
    tests: Vec<String>,
    entries: Vec<Vec<Option<f64>>>,
}

impl ScoreMatrix {
    pub fn new(
        platforms: Vec<String>,
        tests: Vec<String>,
        entries: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, AggregateError> {
        unique("platform", &platforms)?;
        unique("test", &tests)?;
        if entries.len() != platforms.len() {
            return Err(AggregateError::Shape(format!(
                "{} rows for {} platforms",
                entries.len(),
                platforms.len()
            )));
        }
        for (p, row) in platforms.iter().zip(&entries) {
            if row.len() != tests.len() {
                return Err(AggregateError::Shape(format!(
                    "{p}: {} entries for {} tests",
                    row.len(),
                    tests.len()
                )));
            }
            for (t, value) in tests.iter().zip(row) {
                if let Some(v) = *value {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(AggregateError::OutOfRange {
                            platform: p.clone(),
                            test: t.clone(),
                            value: v,
                        });
                    }
                }
            }
        }
        Ok(Self {
            platforms,
            tests,
            entries,
        })
    }

    pub fn platforms(&self) -> &[String] {
        &self.platforms
    }

    pub fn tests(&self) -> &[String] {
        &self.tests
    }

    pub fn row(&self, platform: &str) -> Option<&[Option<f64>]> {
        let i = self.platforms.iter().position(|p| p == platform)?;
        Some(&self.entries[i])
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[Option<f64>])> {
        self.platforms
            .iter()
            .map(String::as_str)
            .zip(self.entries.iter().map(Vec::as_slice))
    }

    /// Non-fatal observations: exact zeros, platforms with no scores.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (p, row) in self.rows() {
            if row.iter().all(Option::is_none) {
                out.push(format!("{p}: no test scores"));
            }
            for (t, v) in self.tests.iter().zip(row) {
                if *v == Some(0.0) {
                    out.push(format!("{p}/{t}: score 0 forces the weighted product to 0"));
                }
            }
        }
        out
    }
}

fn unique(kind: &str, names: &[String]) -> Result<(), AggregateError> {
    let mut seen = HashSet::new();
    match names.iter().find(|n| !seen.insert(n.as_str())) {
        Some(dup) => Err(AggregateError::Shape(format!("duplicate {kind} {dup:?}"))),
        None => Ok(()),
    }
}

/// Per-test weights; only ratios matter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector(BTreeMap<String, f64>);

impl WeightVector {
    pub fn equal<S: AsRef<str>>(tests: &[S]) -> Self {
        Self(tests.iter().map(|t| (t.as_ref().to_string(), 1.0)).collect())
    }

    pub fn new(weights: impl IntoIterator<Item = (String, f64)>) -> Result<Self, AggregateError> {
        let mut map = BTreeMap::new();
        for (test, w) in weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(AggregateError::Weights(format!(
                    "{test}: weight {w} must be finite and >= 0"
                )));
            }
            if map.insert(test.clone(), w).is_some() {
                return Err(AggregateError::Weights(format!("duplicate test {test:?}")));
            }
        }
        Ok(Self(map))
    }

    pub fn get(&self, test: &str) -> Option<f64> {
        self.0.get(test).copied()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|(k, v)| (k.clone(), v * factor)).collect())
    }

    /// Weights in `tests` order; every test needs a weight and no extras are allowed.
    pub fn aligned<S: AsRef<str>>(&self, tests: &[S]) -> Result<Vec<f64>, AggregateError> {
        let weights = tests
            .iter()
            .map(|t| {
                self.get(t.as_ref())
                    .ok_or_else(|| AggregateError::Weights(format!("no weight for test {:?}", t.as_ref())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(extra) = self.0.keys().find(|k| !tests.iter().any(|t| t.as_ref() == k.as_str())) {
            return Err(AggregateError::Weights(format!("weight for unknown test {extra:?}")));
        }
        Ok(weights)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// Renormalize weights over present tests.
    #[default]
    Renormalize,
    /// Any missing test is an error.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AggregateOptions {
    pub missing: MissingPolicy,
    /// Accept exact zero scores, which force the product to zero.
    pub allow_zero: bool,
}

/// `Π φᵢ^w'ᵢ` over present scores, with `w'` the weights renormalized over
/// those tests. `scores` and `weights` are aligned by position.
pub fn weighted_product(
    scores: &[Option<f64>],
    weights: &[f64],
    options: AggregateOptions,
) -> Result<f64, AggregateError> {
    let tests: Vec<String> = (0..scores.len()).map(|i| format!("#{i}")).collect();
    product_row("", &tests, scores, weights, options)
}

fn product_row(
    platform: &str,
    tests: &[String],
    scores: &[Option<f64>],
    weights: &[f64],
    options: AggregateOptions,
) -> Result<f64, AggregateError> {
    if scores.len() != weights.len() {
        return Err(AggregateError::Shape(format!(
            "{} scores for {} weights",
            scores.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(AggregateError::Weights(format!("weight {w} must be finite and >= 0")));
    }
    let mut total = 0.0;
    let mut present = 0;
    for ((score, &w), test) in scores.iter().zip(weights).zip(tests) {
        match *score {
            None if options.missing == MissingPolicy::Strict => {
                return Err(AggregateError::Missing {
                    platform: platform.to_string(),
                    test: test.clone(),
                })
            }
            None => {}
            Some(v) => {
                let allowed = v > 0.0 || (v == 0.0 && options.allow_zero);
                if !allowed || !v.is_finite() {
                    return Err(AggregateError::NonPositive {
                        platform: platform.to_string(),
                        test: test.clone(),
                        value: v,
                    });
                }
                total += w;
                present += 1;
            }
        }
    }
    if present == 0 {
        return Err(AggregateError::AllMissing {
            platform: platform.to_string(),
        });
    }
    if total <= 0.0 {
        return Err(AggregateError::Weights(format!(
            "{platform}: present tests have zero total weight"
        )));
    }
    let mut log_sum = 0.0;
    for (score, &w) in scores.iter().zip(weights) {
        if let Some(v) = *score {
            if w == 0.0 {
                continue;
            }
            if v == 0.0 {
                return Ok(0.0);
            }
            log_sum += (w / total) * v.ln();
        }
    }
    Ok(log_sum.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedPlatform {
    pub rank: usize,
    pub platform: String,
    pub score: f64,
    pub tests_present: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestRanking {
    pub test: String,
    /// Platforms with a score for this test, best first.
    pub entries: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    pub overall: Vec<RankedPlatform>,
    pub per_test: Vec<TestRanking>,
}

impl Ranking {
    pub fn order(&self) -> Vec<&str> {
        self.overall.iter().map(|r| r.platform.as_str()).collect()
    }

    pub fn score(&self, platform: &str) -> Option<f64> {
        self.overall.iter().find(|r| r.platform == platform).map(|r| r.score)
    }
}

/// Descending by score, ties broken by ascending platform id.
fn by_score_then_id(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

pub fn rank(
    matrix: &ScoreMatrix,
    weights: &WeightVector,
    options: AggregateOptions,
) -> Result<Ranking, AggregateError> {
    let aligned = weights.aligned(matrix.tests())?;
    let mut overall = matrix
        .rows()
        .map(|(p, row)| {
            product_row(p, matrix.tests(), row, &aligned, options)
                .map(|score| (p.to_string(), score, row.iter().flatten().count()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    overall.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let per_test = matrix
        .tests()
        .iter()
        .enumerate()
        .map(|(j, test)| {
            let mut entries: Vec<(String, f64)> = matrix
                .rows()
                .filter_map(|(p, row)| row[j].map(|v| (p.to_string(), v)))
                .collect();
            entries.sort_by(by_score_then_id);
            TestRanking {
                test: test.clone(),
                entries,
            }
        })
        .collect();

    Ok(Ranking {
        overall: overall
            .into_iter()
            .enumerate()
            .map(|(i, (platform, score, tests_present))| RankedPlatform {
                rank: i + 1,
                platform,
                score,
                tests_present,
            })
            .collect(),
        per_test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EQUAL: AggregateOptions = AggregateOptions {
        missing: MissingPolicy::Renormalize,
        allow_zero: false,
    };

    fn wp(scores: &[Option<f64>]) -> f64 {
        weighted_product(scores, &vec![1.0; scores.len()], EQUAL).unwrap()
    }

    #[test]
    fn published_rows() {
        let a = wp(&[Some(1.0), Some(1.0), Some(1.0), Some(1.0), Some(0.5), Some(0.76)]);
        assert!((a - 0.851).abs() < 5e-4, "{a}");
        let c = wp(&[Some(0.84), Some(1.0), Some(1.0), Some(0.87), None, None]);
        assert!((c - 0.92).abs() <= 0.005, "{c}");
        let g = wp(&[Some(0.83), Some(0.83), Some(1.0), Some(1.0), Some(0.5), Some(0.79)]);
        assert!((g - 0.80).abs() <= 0.005, "{g}");
    }

    #[test]
    fn idempotent() {
        for s in [0.1, 0.37, 1.0] {
            assert!((wp(&[Some(s); 4]) - s).abs() < 1e-15);
        }
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            weighted_product(&[None, None], &[1.0, 1.0], EQUAL),
            Err(AggregateError::AllMissing { .. })
        ));
        assert!(matches!(
            weighted_product(&[Some(0.0), Some(0.5)], &[1.0, 1.0], EQUAL),
            Err(AggregateError::NonPositive { .. })
        ));
        let zero_ok = AggregateOptions {
            allow_zero: true,
            ..EQUAL
        };
        assert_eq!(
            weighted_product(&[Some(0.0), Some(0.5)], &[1.0, 1.0], zero_ok).unwrap(),
            0.0
        );
        let strict = AggregateOptions {
            missing: MissingPolicy::Strict,
            ..EQUAL
        };
        assert!(matches!(
            weighted_product(&[Some(0.5), None], &[1.0, 1.0], strict),
            Err(AggregateError::Missing { .. })
        ));
        assert!(weighted_product(&[Some(0.5)], &[-1.0], EQUAL).is_err());
        assert!(weighted_product(&[Some(0.5), None], &[0.0, 1.0], EQUAL).is_err());
    }

    #[test]
    fn unequal_weights_renormalize() {
        // 0.25^(1/3) * 1^(2/3)
        let p = weighted_product(&[Some(0.25), Some(1.0), None], &[1.0, 2.0, 5.0], EQUAL).unwrap();
        assert!((p - 0.25f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    fn matrix(rows: &[(&str, &[Option<f64>])]) -> ScoreMatrix {
        let tests: Vec<String> = (0..rows[0].1.len()).map(|i| format!("t{i}")).collect();
        ScoreMatrix::new(
            rows.iter().map(|r| r.0.to_string()).collect(),
            tests,
            rows.iter().map(|r| r.1.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn ranking_ties_are_lexicographic() {
        let m = matrix(&[("b", &[Some(0.5)]), ("a", &[Some(0.5)]), ("c", &[Some(0.9)])]);
        let r = rank(&m, &WeightVector::equal(m.tests()), EQUAL).unwrap();
        assert_eq!(r.order(), ["c", "a", "b"]);
        assert_eq!(r.overall.iter().map(|p| p.rank).collect::<Vec<_>>(), [1, 2, 3]);
        assert_eq!(r.per_test[0].entries[0].0, "c");
    }

    #[test]
    fn single_platform() {
        let m = matrix(&[("solo", &[Some(0.7), None])]);
        let r = rank(&m, &WeightVector::equal(m.tests()), EQUAL).unwrap();
        assert_eq!(r.order(), ["solo"]);
        assert_eq!(r.overall[0].tests_present, 1);
    }

    #[test]
    fn matrix_validation() {
        let err = ScoreMatrix::new(vec!["a".into()], vec!["t".into()], vec![vec![Some(1.5)]]);
        assert!(matches!(err, Err(AggregateError::OutOfRange { .. })));
        let dup = ScoreMatrix::new(
            vec!["a".into(), "a".into()],
            vec!["t".into()],
            vec![vec![None], vec![None]],
        );
        assert!(dup.is_err());
        let m = matrix(&[("a", &[Some(0.0)]), ("b", &[None])]);
        assert_eq!(m.warnings().len(), 2);
    }

    #[test]
    fn weights_must_align() {
        let m = matrix(&[("a", &[Some(0.5), Some(0.5)])]);
        let short = WeightVector::new([("t0".to_string(), 1.0)]).unwrap();
        assert!(rank(&m, &short, EQUAL).is_err());
        let extra = WeightVector::new([("t0".into(), 1.0), ("t1".into(), 1.0), ("t9".into(), 1.0)]).unwrap();
        assert!(rank(&m, &extra, EQUAL).is_err());
    }

    fn arb_row() -> impl Strategy<Value = (Vec<Option<f64>>, Vec<f64>)> {
        prop::collection::vec((prop::option::weighted(0.8, 0.01..=1.0f64), 0.05..5.0f64), 1..8)
            .prop_filter("one present", |v| v.iter().any(|(s, _)| s.is_some()))
            .prop_map(|v| v.into_iter().unzip())
    }

    proptest! {
        #[test]
        fn scale_free((scores, weights) in arb_row(), lambda in 0.01..100.0f64) {
            let base = weighted_product(&scores, &weights, EQUAL).unwrap();
            let scaled: Vec<f64> = weights.iter().map(|w| w * lambda).collect();
            let other = weighted_product(&scores, &scaled, EQUAL).unwrap();
            prop_assert!((base - other).abs() < 1e-12);
        }

        #[test]
        fn bounded_and_geometric_mean((scores, _) in arb_row()) {
            let p = wp(&scores);
            prop_assert!(p > 0.0 && p <= 1.0);
            let present: Vec<f64> = scores.iter().flatten().copied().collect();
            let gm = (present.iter().map(|v| v.ln()).sum::<f64>() / present.len() as f64).exp();
            prop_assert!((p - gm).abs() < 1e-12);
        }

        #[test]
        fn strictly_monotone((scores, weights) in arb_row(), pick in any::<prop::sample::Index>(), bump in 0.01..0.5f64) {
            let present: Vec<usize> = (0..scores.len()).filter(|&i| scores[i].is_some()).collect();
            let i = present[pick.index(present.len())];
            let old = scores[i].unwrap();
            let new = (old + bump).min(1.0);
            prop_assume!(new - old > 1e-3);
            let mut raised = scores.clone();
            raised[i] = Some(new);
            let before = weighted_product(&scores, &weights, EQUAL).unwrap();
            let after = weighted_product(&raised, &weights, EQUAL).unwrap();
            prop_assert!(after > before, "{before} -> {after}");
        }
    }
}
