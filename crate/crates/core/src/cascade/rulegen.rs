use crate::fis::{Clause, LinguisticVariable, OutputLevels, Polarity, Rule};

use super::CascadeError;

/// Full-grid rule base with one rule per combination of input terms.
///
/// Each term index is read as a favorability position in `[0, 1]`
/// (reflected for cost variables). The consequent is the output level at
/// the mean position scaled onto the output index range, rounded half up.
/// Rules are emitted with the first variable varying slowest.
pub fn generate_default_rulebase(
    variables: &[LinguisticVariable],
    levels: &OutputLevels,
) -> Result<Vec<Rule>, CascadeError> {
    if variables.is_empty() {
        return Err(CascadeError::RuleGeneration("no input variables".into()));
    }
    let mut polarities = Vec::with_capacity(variables.len());
    for var in variables {
        let polarity = var
            .polarity()
            .ok_or_else(|| CascadeError::RuleGeneration(format!("variable {} has no polarity", var.name())))?;
        if var.terms().len() < 2 {
            return Err(CascadeError::RuleGeneration(format!(
                "variable {} needs at least two terms",
                var.name()
            )));
        }
        polarities.push(polarity);
    }

    // Positions idx/(m-1) are put over the common denominator Π(m-1).
    let spans: Vec<u64> = variables.iter().map(|v| v.terms().len() as u64 - 1).collect();
    let common: u64 = spans.iter().product();
    let k = variables.len() as u64;
    let top = levels.len() as u64 - 1;

    let mut rules = Vec::new();
    let mut idx = vec![0usize; variables.len()];
    loop {
        let numerator: u64 = idx
            .iter()
            .zip(&spans)
            .zip(&polarities)
            .map(|((&i, &span), polarity)| {
                let i = i as u64;
                let adjusted = match polarity {
                    Polarity::Benefit => i,
                    Polarity::Cost => span - i,
                };
                adjusted * (common / span)
            })
            .sum();
        // round_half_up(numerator * top / (k * common))
        let denom = k * common;
        let level = ((2 * numerator * top + denom) / (2 * denom)) as usize;
        let antecedent = variables
            .iter()
            .zip(&idx)
            .map(|(v, &i)| Clause::new(v.name(), v.terms()[i].label.clone()))
            .collect();
        rules.push(Rule::new(antecedent, levels.levels()[level].label.clone()));

        let mut pos = variables.len();
        loop {
            if pos == 0 {
                return Ok(rules);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < variables[pos].terms().len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{axis_variable, catalog_variable};

    fn consequents(rules: &[Rule]) -> Vec<&str> {
        rules.iter().map(|r| r.consequent.as_str()).collect()
    }

    #[test]
    fn single_benefit_is_identity() {
        let rules = generate_default_rulebase(&[axis_variable("EC")], &OutputLevels::default()).unwrap();
        assert_eq!(consequents(&rules), ["very_bad", "medium", "very_good"]);
    }

    #[test]
    fn single_cost_is_reflected() {
        let crash = catalog_variable("Crash").unwrap();
        assert_eq!(crash.polarity(), Some(Polarity::Cost));
        let rules = generate_default_rulebase(&[crash], &OutputLevels::default()).unwrap();
        assert_eq!(consequents(&rules), ["very_good", "medium", "very_bad"]);
    }

    #[test]
    fn two_benefit_inputs() {
        let rules =
            generate_default_rulebase(&[axis_variable("EC"), axis_variable("MC")], &OutputLevels::default()).unwrap();
        assert_eq!(rules.len(), 9);
        // (high, low): mean position 1/2 of the way -> index 2 of 4.
        let high_low = rules
            .iter()
            .find(|r| r.antecedent == [Clause::new("EC", "high"), Clause::new("MC", "low")])
            .unwrap();
        assert_eq!(high_low.consequent, "medium");
    }

    #[test]
    fn three_inputs_round_half_up() {
        let vars = [axis_variable("a"), axis_variable("b"), axis_variable("c")];
        let rules = generate_default_rulebase(&vars, &OutputLevels::default()).unwrap();
        assert_eq!(rules.len(), 27);
        // sum of indices s -> round(s * 4 / 6): 0,1,1,2,3,3,4 for s = 0..=6
        let expected = ["very_bad", "bad", "bad", "medium", "good", "good", "very_good"];
        for rule in &rules {
            let s: usize = rule
                .antecedent
                .iter()
                .map(|c| ["low", "medium", "high"].iter().position(|l| *l == c.term).unwrap())
                .sum();
            assert_eq!(rule.consequent, expected[s], "{rule}");
        }
    }

    #[test]
    fn order_of_variables_does_not_change_mapping() {
        let a = catalog_variable("Crash").unwrap();
        let b = catalog_variable("Comp").unwrap();
        let forward = generate_default_rulebase(&[a.clone(), b.clone()], &OutputLevels::default()).unwrap();
        let backward = generate_default_rulebase(&[b, a], &OutputLevels::default()).unwrap();
        for rule in &forward {
            let mirrored = backward
                .iter()
                .find(|r| r.antecedent.iter().rev().eq(rule.antecedent.iter()))
                .unwrap();
            assert_eq!(mirrored.consequent, rule.consequent);
        }
    }

    #[test]
    fn polarity_required() {
        let v = axis_variable("EC").with_polarity(None);
        assert!(matches!(
            generate_default_rulebase(&[v], &OutputLevels::default()),
            Err(CascadeError::RuleGeneration(_))
        ));
    }
}
