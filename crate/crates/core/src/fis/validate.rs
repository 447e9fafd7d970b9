use std::fmt;

use serde::Serialize;

use super::SugenoFis;

pub const DEFAULT_RESOLUTION: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    /// Grid points in `[from, to]` where no term of `variable` has positive membership.
    CoverageGap { variable: String, from: f64, to: f64 },
    /// Rule whose strength is zero at every grid point.
    UnreachableRule { rule: usize, text: String },
    /// A grid point where every rule has zero strength.
    NoRuleFires { inputs: Vec<(String, f64)> },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::CoverageGap { variable, from, to } => {
                write!(f, "coverage gap: {variable} has no membership on [{from}, {to}]")
            }
            Finding::UnreachableRule { rule, text } => {
                write!(f, "unreachable rule #{rule}: {text}")
            }
            Finding::NoRuleFires { inputs } => {
                let parts: Vec<String> = inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
                write!(f, "no rule fires at {{{}}}", parts.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub fis: String,
    pub resolution: usize,
    pub findings: Vec<Finding>,
    /// Variables whose parameters are documented assumptions rather than data.
    pub assumed: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.is_valid() { "valid" } else { "INVALID" };
        writeln!(f, "{}: {status} (resolution {})", self.fis, self.resolution)?;
        for finding in &self.findings {
            writeln!(f, "  - {finding}")?;
        }
        for var in &self.assumed {
            writeln!(f, "  note: {var} uses assumed parameters")?;
        }
        Ok(())
    }
}

/// Support pattern of one variable at one grid point: which terms are active.
struct Pattern {
    active: Vec<bool>,
    witness: f64,
}

pub(super) fn validate(fis: &SugenoFis, resolution: usize) -> ValidationReport {
    let resolution = resolution.max(2);
    let mut findings = Vec::new();

    // Per variable: coverage gaps, per-term reachability and distinct support patterns.
    let mut term_reachable: Vec<Vec<bool>> = Vec::new();
    let mut patterns: Vec<Vec<Pattern>> = Vec::new();
    for var in fis.inputs() {
        let mut reachable = vec![false; var.terms().len()];
        let mut var_patterns: Vec<Pattern> = Vec::new();
        let mut gap: Option<(f64, f64)> = None;
        for x in var.domain().linspace(resolution) {
            let degrees = var.fuzzify(x);
            let active: Vec<bool> = degrees.iter().map(|d| *d > 0.0).collect();
            for (r, a) in reachable.iter_mut().zip(&active) {
                *r |= *a;
            }
            if active.iter().any(|a| *a) {
                if let Some((from, to)) = gap.take() {
                    findings.push(Finding::CoverageGap {
                        variable: var.name().to_string(),
                        from,
                        to,
                    });
                }
            } else {
                gap = Some(gap.map_or((x, x), |(from, _)| (from, x)));
            }
            if !var_patterns.iter().any(|p| p.active == active) {
                var_patterns.push(Pattern { active, witness: x });
            }
        }
        if let Some((from, to)) = gap {
            findings.push(Finding::CoverageGap {
                variable: var.name().to_string(),
                from,
                to,
            });
        }
        term_reachable.push(reachable);
        patterns.push(var_patterns);
    }

    for (i, rule) in fis.compiled.iter().enumerate() {
        if !rule.clauses.iter().all(|&(v, t)| term_reachable[v][t]) {
            findings.push(Finding::UnreachableRule {
                rule: i,
                text: fis.rules[i].to_string(),
            });
        }
    }

    // Rules fire or not depending only on which terms are active, so checking
    // each combination of per-variable patterns covers the whole grid.
    let mut choice = vec![0usize; patterns.len()];
    'outer: loop {
        let fires = fis
            .compiled
            .iter()
            .any(|rule| rule.clauses.iter().all(|&(v, t)| patterns[v][choice[v]].active[t]));
        if !fires {
            findings.push(Finding::NoRuleFires {
                inputs: fis
                    .inputs()
                    .iter()
                    .zip(&choice)
                    .enumerate()
                    .map(|(v, (var, &c))| (var.name().to_string(), patterns[v][c].witness))
                    .collect(),
            });
            break;
        }
        for v in (0..choice.len()).rev() {
            choice[v] += 1;
            if choice[v] < patterns[v].len() {
                continue 'outer;
            }
            choice[v] = 0;
        }
        break;
    }

    ValidationReport {
        fis: fis.name().to_string(),
        resolution,
        findings,
        assumed: fis
            .inputs()
            .iter()
            .filter(|v| v.is_assumed())
            .map(|v| v.name().to_string())
            .collect(),
    }
}
