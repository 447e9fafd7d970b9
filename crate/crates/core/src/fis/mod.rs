//! Zero-order Takagi-Sugeno inference.
//!
//! A [`SugenoFis`] fuzzifies crisp inputs with triangular membership
//! functions, fires each rule through a t-norm, and collapses the fired
//! rules onto singleton output levels with a weighted average:
//!
//! ```text
//! s = Σ wᵢ·zᵢ / Σ wᵢ
//! ```
//!
//! Definitions are immutable once built; every evaluation method takes
//! `&self` and is safe to share across threads.

mod mf;
mod validate;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mf::TriangularMf;
pub use validate::{Finding, ValidationReport, DEFAULT_RESOLUTION};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FisError {
    #[error("invalid membership function {name} {params:?}: requires a <= b <= c")]
    InvalidMf { name: String, params: [f64; 3] },
    #[error("membership function {name} {params:?} leaves domain [{min}, {max}]")]
    MfOutsideDomain {
        name: String,
        params: [f64; 3],
        min: f64,
        max: f64,
    },
    #[error("membership function {name} collapses to a point inside a non-degenerate domain")]
    PointMf { name: String },
    #[error("variable {variable}: invalid domain [{min}, {max}]")]
    InvalidDomain { variable: String, min: f64, max: f64 },
    #[error("variable {0} has no terms")]
    NoTerms(String),
    #[error("duplicate {kind} name {name:?}")]
    Duplicate { kind: &'static str, name: String },
    #[error("invalid output levels: {0}")]
    InvalidLevels(String),
    #[error("fis {fis}: rule {rule}: {message}")]
    InvalidRule { fis: String, rule: usize, message: String },
    #[error("fis {fis}: missing input {variable}")]
    MissingInput { fis: String, variable: String },
    #[error("fis {fis}: unexpected input {variable}")]
    UnexpectedInput { fis: String, variable: String },
    #[error("fis {fis}: input {variable} is not finite ({value})")]
    NonFiniteInput { fis: String, variable: String, value: f64 },
    #[error("fis {fis}: expected {expected} inputs, got {actual}")]
    InputCount {
        fis: String,
        expected: usize,
        actual: usize,
    },
    #[error("defuzzify: {0}")]
    BadWeights(String),
    #[error("fis {fis}: no rule fired for inputs {}", format_inputs(.inputs))]
    NoRuleFired { fis: String, inputs: Vec<(String, f64)> },
}

fn format_inputs(inputs: &[(String, f64)]) -> String {
    let parts: Vec<String> = inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Larger raw values are more favorable.
    Benefit,
    /// Larger raw values are less favorable.
    Cost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TNorm {
    #[default]
    Product,
    Minimum,
}

impl TNorm {
    pub fn combine(self, degrees: impl IntoIterator<Item = f64>) -> f64 {
        match self {
            TNorm::Product => degrees.into_iter().product(),
            TNorm::Minimum => degrees.into_iter().fold(1.0, f64::min),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub min: f64,
    pub max: f64,
}

impl Domain {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    /// `n` evenly spaced points from `min` to `max` inclusive (`n >= 2`).
    pub fn linspace(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let last = n.saturating_sub(1).max(1);
        (0..n).map(move |i| {
            if i == last {
                self.max
            } else {
                self.min + self.width() * (i as f64 / last as f64)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub label: String,
    pub mf: TriangularMf,
}

impl Term {
    pub fn new(label: impl Into<String>, mf: TriangularMf) -> Self {
        Self {
            label: label.into(),
            mf,
        }
    }
}

pub const LEVEL_LABELS: [&str; 3] = ["low", "medium", "high"];

/// A named crisp input partitioned into labeled fuzzy sets.
#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    name: String,
    unit: String,
    domain: Domain,
    polarity: Option<Polarity>,
    terms: Vec<Term>,
    assumed: bool,
}

impl LinguisticVariable {
    pub fn new(
        name: impl Into<String>,
        unit: impl Into<String>,
        domain: Domain,
        polarity: Option<Polarity>,
        terms: Vec<Term>,
    ) -> Result<Self, FisError> {
        let name = name.into();
        if !(domain.min.is_finite() && domain.max.is_finite()) || domain.min > domain.max {
            return Err(FisError::InvalidDomain {
                variable: name,
                min: domain.min,
                max: domain.max,
            });
        }
        if terms.is_empty() {
            return Err(FisError::NoTerms(name));
        }
        let mut seen = HashSet::new();
        for term in &terms {
            let qualified = format!("{name}.{}", term.label);
            if !seen.insert(term.label.as_str()) {
                return Err(FisError::Duplicate {
                    kind: "term",
                    name: qualified,
                });
            }
            let [a, b, c] = term.mf.params();
            if a < domain.min || c > domain.max {
                return Err(FisError::MfOutsideDomain {
                    name: qualified,
                    params: [a, b, c],
                    min: domain.min,
                    max: domain.max,
                });
            }
            if a == c && domain.min < domain.max {
                return Err(FisError::PointMf { name: qualified });
            }
        }
        Ok(Self {
            name,
            unit: unit.into(),
            domain,
            polarity,
            terms,
            assumed: false,
        })
    }

    /// The usual low/medium/high variable from three `(a, b, c)` triplets.
    pub fn three_level(
        name: impl Into<String>,
        unit: impl Into<String>,
        domain: Domain,
        polarity: Option<Polarity>,
        params: [[f64; 3]; 3],
    ) -> Result<Self, FisError> {
        let name = name.into();
        let terms = LEVEL_LABELS
            .iter()
            .zip(params)
            .map(|(label, [a, b, c])| {
                TriangularMf::new(a, b, c)
                    .map(|mf| Term::new(*label, mf))
                    .map_err(|_| FisError::InvalidMf {
                        name: format!("{name}.{label}"),
                        params: [a, b, c],
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(name, unit, domain, polarity, terms)
    }

    /// Marks the parameters as not taken from measured data.
    pub fn with_assumed(mut self, assumed: bool) -> Self {
        self.assumed = assumed;
        self
    }

    pub fn with_polarity(mut self, polarity: Option<Polarity>) -> Self {
        self.polarity = polarity;
        self
    }

    /// Same membership functions under a different name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..self.clone()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn polarity(&self) -> Option<Polarity> {
        self.polarity
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_assumed(&self) -> bool {
        self.assumed
    }

    pub fn term_index(&self, label: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.label == label)
    }

    pub fn term(&self, label: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.label == label)
    }

    /// Membership degree of `x` in every term, in term order.
    pub fn fuzzify(&self, x: f64) -> Vec<f64> {
        self.terms.iter().map(|t| t.mf.membership(x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputLevel {
    pub label: String,
    pub value: f64,
}

/// Ordered singleton consequents.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputLevels {
    levels: Vec<OutputLevel>,
}

pub const DEFAULT_OUTPUT_LABELS: [&str; 5] = ["very_bad", "bad", "medium", "good", "very_good"];
pub const DEFAULT_OUTPUT_VALUES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

impl OutputLevels {
    pub fn new(levels: Vec<OutputLevel>) -> Result<Self, FisError> {
        if levels.is_empty() {
            return Err(FisError::InvalidLevels("no levels".into()));
        }
        let mut seen = HashSet::new();
        for level in &levels {
            if !level.value.is_finite() {
                return Err(FisError::InvalidLevels(format!("{} is not finite", level.label)));
            }
            if !seen.insert(level.label.as_str()) {
                return Err(FisError::Duplicate {
                    kind: "output level",
                    name: level.label.clone(),
                });
            }
        }
        if let Some(w) = levels.windows(2).find(|w| w[0].value >= w[1].value) {
            return Err(FisError::InvalidLevels(format!(
                "values must be strictly increasing ({} = {} >= {} = {})",
                w[0].label, w[0].value, w[1].label, w[1].value
            )));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[OutputLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.label == label)
    }

    pub fn value(&self, index: usize) -> f64 {
        self.levels[index].value
    }

    pub fn min_value(&self) -> f64 {
        self.levels[0].value
    }

    pub fn max_value(&self) -> f64 {
        self.levels[self.levels.len() - 1].value
    }
}

impl Default for OutputLevels {
    fn default() -> Self {
        Self {
            levels: DEFAULT_OUTPUT_LABELS
                .iter()
                .zip(DEFAULT_OUTPUT_VALUES)
                .map(|(label, value)| OutputLevel {
                    label: (*label).to_string(),
                    value,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    pub variable: String,
    pub term: String,
}

impl Clause {
    pub fn new(variable: impl Into<String>, term: impl Into<String>) -> Self {
        Self {
            variable: variable.into(),
            term: term.into(),
        }
    }
}

/// `IF v1 is t1 AND v2 is t2 ... THEN consequent`, scaled by `weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub antecedent: Vec<Clause>,
    pub consequent: String,
    pub weight: f64,
}

impl Rule {
    pub fn new(antecedent: Vec<Clause>, consequent: impl Into<String>) -> Self {
        Self {
            antecedent,
            consequent: consequent.into(),
            weight: 1.0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clauses: Vec<String> = self
            .antecedent
            .iter()
            .map(|c| format!("{} is {}", c.variable, c.term))
            .collect();
        write!(f, "IF {} THEN {}", clauses.join(" AND "), self.consequent)?;
        if self.weight != 1.0 {
            write!(f, " ({})", self.weight)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct CompiledRule {
    clauses: Vec<(usize, usize)>,
    consequent: usize,
    weight: f64,
}

/// Per-variable membership degrees produced by [`SugenoFis::fuzzify`].
#[derive(Debug, Clone, PartialEq)]
pub struct Degrees<'f> {
    fis: &'f SugenoFis,
    values: Vec<Vec<f64>>,
}

impl Degrees<'_> {
    pub fn variable(&self, name: &str) -> Option<&[f64]> {
        let idx = self.fis.input_index(name)?;
        Some(&self.values[idx])
    }

    pub fn get(&self, variable: &str, label: &str) -> Option<f64> {
        let vi = self.fis.input_index(variable)?;
        let ti = self.fis.inputs[vi].term_index(label)?;
        Some(self.values[vi][ti])
    }

    pub fn as_rows(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// One zero-order Sugeno inference node.
#[derive(Debug, Clone, PartialEq)]
pub struct SugenoFis {
    name: String,
    inputs: Vec<LinguisticVariable>,
    output: OutputLevels,
    rules: Vec<Rule>,
    tnorm: TNorm,
    compiled: Vec<CompiledRule>,
}

impl SugenoFis {
    /// Builds a FIS, rejecting rules that reference unknown variables,
    /// terms or output levels.
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<LinguisticVariable>,
        output: OutputLevels,
        rules: Vec<Rule>,
        tnorm: TNorm,
    ) -> Result<Self, FisError> {
        let name = name.into();
        let mut seen = HashSet::new();
        for var in &inputs {
            if !seen.insert(var.name()) {
                return Err(FisError::Duplicate {
                    kind: "input",
                    name: format!("{name}.{}", var.name()),
                });
            }
        }
        let compiled = rules
            .iter()
            .enumerate()
            .map(|(i, rule)| compile_rule(&name, &inputs, &output, i, rule))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            name,
            inputs,
            output,
            rules,
            tnorm,
            compiled,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn output(&self) -> &OutputLevels {
        &self.output
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn tnorm(&self) -> TNorm {
        self.tnorm
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|v| v.name() == name)
    }

    pub fn input(&self, name: &str) -> Option<&LinguisticVariable> {
        self.inputs.iter().find(|v| v.name() == name)
    }

    /// Orders named inputs to match [`Self::inputs`], rejecting missing,
    /// duplicated, unknown and non-finite entries.
    pub fn positional<I, K>(&self, inputs: I) -> Result<Vec<f64>, FisError>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: AsRef<str>,
    {
        let mut slots: Vec<Option<f64>> = vec![None; self.inputs.len()];
        for (key, value) in inputs {
            let key = key.as_ref();
            let idx = self.input_index(key).ok_or_else(|| FisError::UnexpectedInput {
                fis: self.name.clone(),
                variable: key.to_string(),
            })?;
            if slots[idx].replace(value).is_some() {
                return Err(FisError::Duplicate {
                    kind: "input",
                    name: format!("{}.{key}", self.name),
                });
            }
        }
        slots
            .into_iter()
            .zip(&self.inputs)
            .map(|(slot, var)| {
                slot.ok_or_else(|| FisError::MissingInput {
                    fis: self.name.clone(),
                    variable: var.name().to_string(),
                })
            })
            .collect()
    }

    pub fn fuzzify<I, K>(&self, inputs: I) -> Result<Degrees<'_>, FisError>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: AsRef<str>,
    {
        let xs = self.positional(inputs)?;
        self.fuzzify_at(&xs)
    }

    /// Fuzzifies inputs given in [`Self::inputs`] order.
    pub fn fuzzify_at(&self, xs: &[f64]) -> Result<Degrees<'_>, FisError> {
        self.check_shape(xs)?;
        let values = self.inputs.iter().zip(xs).map(|(var, &x)| var.fuzzify(x)).collect();
        Ok(Degrees { fis: self, values })
    }

    /// Strength of every rule, in rule order.
    pub fn firing_strengths(&self, degrees: &Degrees<'_>) -> Vec<f64> {
        self.compiled
            .iter()
            .map(|rule| {
                let clause_degrees = rule.clauses.iter().map(|&(v, t)| degrees.values[v][t]);
                rule.weight * self.tnorm.combine(clause_degrees)
            })
            .collect()
    }

    pub fn evaluate<I, K>(&self, inputs: I) -> Result<f64, FisError>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: AsRef<str>,
    {
        let xs = self.positional(inputs)?;
        self.evaluate_at(&xs)
    }

    /// Crisp output for inputs in [`Self::inputs`] order.
    pub fn evaluate_at(&self, xs: &[f64]) -> Result<f64, FisError> {
        let degrees = self.fuzzify_at(xs)?;
        let weights = self.firing_strengths(&degrees);
        let singletons: Vec<f64> = self.compiled.iter().map(|r| self.output.value(r.consequent)).collect();
        defuzzify(&weights, &singletons).map_err(|err| match err {
            FisError::NoRuleFired { .. } => FisError::NoRuleFired {
                fis: self.name.clone(),
                inputs: self
                    .inputs
                    .iter()
                    .map(|v| v.name().to_string())
                    .zip(xs.iter().copied())
                    .collect(),
            },
            other => other,
        })
    }

    /// Grid-sweep diagnostics at `resolution` points per variable.
    pub fn validate(&self, resolution: usize) -> ValidationReport {
        validate::validate(self, resolution)
    }

    fn check_shape(&self, xs: &[f64]) -> Result<(), FisError> {
        if xs.len() != self.inputs.len() {
            return Err(FisError::InputCount {
                fis: self.name.clone(),
                expected: self.inputs.len(),
                actual: xs.len(),
            });
        }
        if let Some((var, &value)) = self.inputs.iter().zip(xs).find(|(_, x)| !x.is_finite()) {
            return Err(FisError::NonFiniteInput {
                fis: self.name.clone(),
                variable: var.name().to_string(),
                value,
            });
        }
        Ok(())
    }
}

fn compile_rule(
    fis: &str,
    inputs: &[LinguisticVariable],
    output: &OutputLevels,
    index: usize,
    rule: &Rule,
) -> Result<CompiledRule, FisError> {
    let invalid = |message: String| FisError::InvalidRule {
        fis: fis.to_string(),
        rule: index,
        message,
    };
    if rule.antecedent.is_empty() {
        return Err(invalid("empty antecedent".into()));
    }
    if !(rule.weight > 0.0 && rule.weight <= 1.0) {
        return Err(invalid(format!("weight {} outside (0, 1]", rule.weight)));
    }
    let mut clauses = Vec::with_capacity(rule.antecedent.len());
    for clause in &rule.antecedent {
        let vi = inputs
            .iter()
            .position(|v| v.name() == clause.variable)
            .ok_or_else(|| invalid(format!("unknown variable {:?}", clause.variable)))?;
        if clauses.iter().any(|&(v, _)| v == vi) {
            return Err(invalid(format!("more than one clause on {:?}", clause.variable)));
        }
        let ti = inputs[vi]
            .term_index(&clause.term)
            .ok_or_else(|| invalid(format!("unknown term {}.{}", clause.variable, clause.term)))?;
        clauses.push((vi, ti));
    }
    let consequent = output
        .index_of(&rule.consequent)
        .ok_or_else(|| invalid(format!("unknown output level {:?}", rule.consequent)))?;
    Ok(CompiledRule {
        clauses,
        consequent,
        weight: rule.weight,
    })
}

/// Firing strength of a named rule against precomputed degrees.
pub fn firing_strength(rule: &Rule, degrees: &Degrees<'_>, tnorm: TNorm) -> Option<f64> {
    let clause_degrees = rule
        .antecedent
        .iter()
        .map(|c| degrees.get(&c.variable, &c.term))
        .collect::<Option<Vec<f64>>>()?;
    Some(rule.weight * tnorm.combine(clause_degrees))
}

/// Weighted average of singleton outputs.
///
/// The result is clamped to the range of singletons with positive weight
/// so rounding can never push it outside.
pub fn defuzzify(weights: &[f64], singletons: &[f64]) -> Result<f64, FisError> {
    if weights.is_empty() || weights.len() != singletons.len() {
        return Err(FisError::BadWeights(format!(
            "{} weights for {} singletons",
            weights.len(),
            singletons.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(FisError::BadWeights(format!(
            "weight {w} is not a finite non-negative number"
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&w, &z) in weights.iter().zip(singletons) {
        num += w * z;
        den += w;
        if w > 0.0 {
            lo = lo.min(z);
            hi = hi.max(z);
        }
    }
    if den <= 0.0 {
        return Err(FisError::NoRuleFired {
            fis: String::new(),
            inputs: Vec::new(),
        });
    }
    Ok((num / den).clamp(lo, hi))
}
