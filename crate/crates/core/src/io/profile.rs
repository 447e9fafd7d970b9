//! The `*.profile.json` document.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::cascade::{
    generate_default_rulebase, Axis, Binding, CascadeError, CascadeGraph, CascadeNode, FieldSpec, NodeSource, TestKind,
    TestProfile,
};
use crate::fis::{
    Clause, Domain, FisError, LinguisticVariable, OutputLevel, OutputLevels, Polarity, Rule, SugenoFis, TNorm, Term,
    TriangularMf, DEFAULT_RESOLUTION,
};

use super::{pointer_token, ConfigError, Parsed, Pointer, Strictness};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub schema_version: u32,
    pub metadata: MetadataDoc,
    pub variables: Vec<VariableDoc>,
    pub fis: Vec<FisDoc>,
    pub cascade: CascadeDoc,
    pub record_schema: Vec<FieldSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataDoc {
    pub name: String,
    pub kind: TestKind,
    #[serde(default)]
    pub description: String,
    /// Variables whose parameters are assumptions rather than data.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assumed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDoc {
    pub name: String,
    #[serde(default)]
    pub unit: String,
    pub domain: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarity: Option<Polarity>,
    pub terms: Vec<TermDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub label: String,
    pub mf: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisDoc {
    pub name: String,
    pub inputs: Vec<String>,
    #[serde(default)]
    pub tnorm: TNorm,
    /// Omitted means the five default levels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<Vec<OutputLevel>>,
    pub rules: RulesDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RulesDoc {
    Generate(GenerateDoc),
    Explicit(Vec<RuleDoc>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateDoc {
    pub generate: GenerateMode,
    /// Inputs the generated rules range over; all inputs when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub over: Option<Vec<String>>,
    /// Per-input polarity used for generation instead of the variable's own.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub polarity: BTreeMap<String, Polarity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerateMode {
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleDoc {
    /// `[variable, term]` pairs joined by AND.
    #[serde(rename = "if")]
    pub antecedent: Vec<(String, String)>,
    pub then: String,
    #[serde(default = "unit_weight", skip_serializing_if = "is_unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

fn is_unit_weight(w: &f64) -> bool {
    *w == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeDoc {
    pub terminal: String,
    pub nodes: Vec<NodeDoc>,
}

/// A node is either a FIS (by name) with bindings for each of its inputs,
/// or a constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bindings: BTreeMap<String, Binding>,
}

fn invalid(path: String, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path,
        message: message.into(),
    }
}

fn ignored_pointer(path: &serde_ignored::Path<'_>) -> String {
    use serde_ignored::Path;
    match path {
        Path::Root => String::new(),
        Path::Seq { parent, index } => format!("{}/{index}", ignored_pointer(parent)),
        Path::Map { parent, key } => format!("{}/{}", ignored_pointer(parent), pointer_token(key)),
        Path::Some { parent } | Path::NewtypeStruct { parent } | Path::NewtypeVariant { parent } => {
            ignored_pointer(parent)
        }
    }
}

fn error_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    path.iter()
        .map(|seg| match seg {
            Segment::Seq { index } => format!("/{index}"),
            Segment::Map { key } => format!("/{}", pointer_token(key)),
            Segment::Enum { variant } => format!("/{}", pointer_token(variant)),
            Segment::Unknown => "/?".to_string(),
        })
        .collect()
}

fn syntax(err: &serde_json::Error) -> ConfigError {
    ConfigError::Syntax {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

/// Parses the document structure without building the cascade.
/// Unknown keys are errors in strict mode and warnings otherwise.
pub fn parse_profile_document(text: &str, strictness: Strictness) -> Result<Parsed<ProfileDocument>, ConfigError> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| syntax(&e))?;
    match raw.get("schema_version") {
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => {}
        Some(v) => {
            return Err(ConfigError::Version {
                found: v.to_string(),
                expected: SCHEMA_VERSION,
            })
        }
        None => return Err(invalid(String::new(), "missing schema_version")),
    }

    let mut unknown = Vec::new();
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: ProfileDocument = {
        let mut record = |path: serde_ignored::Path<'_>| unknown.push(ignored_pointer(&path));
        let tracked = serde_ignored::Deserializer::new(&mut de, &mut record);
        serde_path_to_error::deserialize(tracked).map_err(|err| {
            let inner = err.inner();
            invalid(
                error_pointer(err.path()),
                format!(
                    "{} (line {}, column {})",
                    strip_position(inner),
                    inner.line(),
                    inner.column()
                ),
            )
        })?
    };
    de.end().map_err(|e| syntax(&e))?;

    let unknown: Vec<String> = unknown.into_iter().map(|p| format!("{p}: unknown key")).collect();
    match strictness {
        Strictness::Strict if !unknown.is_empty() => Err(ConfigError::Unknown(unknown)),
        _ => Ok(Parsed {
            value: doc,
            warnings: unknown,
        }),
    }
}

fn strip_position(err: &serde_json::Error) -> String {
    let s = err.to_string();
    match s.find(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

/// Parses and fully validates a profile. In strict mode any validation
/// finding is an error; in lenient mode findings become warnings.
pub fn parse_profile(text: &str, strictness: Strictness) -> Result<Parsed<TestProfile>, ConfigError> {
    let Parsed {
        value: doc,
        mut warnings,
    } = parse_profile_document(text, strictness)?;
    let profile = doc.to_profile()?;
    for (k, fis) in doc.fis.iter().enumerate() {
        let Some(built) = profile.graph().find_fis(&fis.name) else {
            continue;
        };
        let report = built.validate(DEFAULT_RESOLUTION);
        if report.is_valid() {
            continue;
        }
        let path = Pointer(&[&"fis", &k]).to_string();
        let messages: Vec<String> = report.findings.iter().map(|f| format!("{path}: {f}")).collect();
        match strictness {
            Strictness::Strict => return Err(invalid(path, messages.join("; "))),
            Strictness::Lenient => warnings.extend(messages),
        }
    }
    Ok(Parsed {
        value: profile,
        warnings,
    })
}

/// Pretty JSON with a trailing newline.
pub fn serialize_profile(profile: &TestProfile) -> Result<String, ConfigError> {
    let doc = ProfileDocument::from_profile(profile)?;
    let mut text = serde_json::to_string_pretty(&doc).expect("documents serialize");
    text.push('\n');
    Ok(text)
}

impl ProfileDocument {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("documents serialize");
        text.push('\n');
        text
    }

    pub fn from_profile(profile: &TestProfile) -> Result<Self, ConfigError> {
        let mut variables: Vec<VariableDoc> = Vec::new();
        let mut assumed = Vec::new();
        let mut fis_docs: Vec<FisDoc> = Vec::new();
        let mut nodes = Vec::new();

        for node in profile.graph().nodes() {
            match &node.source {
                NodeSource::Constant(value) => nodes.push(NodeDoc {
                    name: node.name.clone(),
                    axis: node.axis,
                    fis: None,
                    constant: Some(*value),
                    bindings: BTreeMap::new(),
                }),
                NodeSource::Fis { fis, bindings } => {
                    for var in fis.inputs() {
                        let doc = variable_doc(var);
                        match variables.iter().find(|v| v.name == doc.name) {
                            Some(existing) if *existing != doc => {
                                return Err(invalid(
                                    "/variables".into(),
                                    format!("variable {} has conflicting definitions", doc.name),
                                ))
                            }
                            Some(_) => {}
                            None => {
                                if var.is_assumed() {
                                    assumed.push(doc.name.clone());
                                }
                                variables.push(doc);
                            }
                        }
                    }
                    let doc = fis_doc(fis);
                    match fis_docs.iter().find(|f| f.name == doc.name) {
                        Some(existing) if *existing != doc => {
                            return Err(invalid(
                                "/fis".into(),
                                format!("fis {} has conflicting definitions", doc.name),
                            ))
                        }
                        Some(_) => {}
                        None => fis_docs.push(doc),
                    }
                    nodes.push(NodeDoc {
                        name: node.name.clone(),
                        axis: node.axis,
                        fis: Some(fis.name().to_string()),
                        constant: None,
                        bindings: fis
                            .inputs()
                            .iter()
                            .map(|v| v.name().to_string())
                            .zip(bindings.iter().cloned())
                            .collect(),
                    });
                }
            }
        }

        Ok(Self {
            schema_version: SCHEMA_VERSION,
            metadata: MetadataDoc {
                name: profile.name().to_string(),
                kind: profile.kind(),
                description: profile.description().to_string(),
                assumed,
            },
            variables,
            fis: fis_docs,
            cascade: CascadeDoc {
                terminal: profile.graph().terminal().name.clone(),
                nodes,
            },
            record_schema: profile.record_schema().to_vec(),
        })
    }

    /// Builds the cascade, reporting problems with a JSON pointer.
    pub fn to_profile(&self) -> Result<TestProfile, ConfigError> {
        let variables = self.build_variables()?;
        let fis = self.build_fis(&variables)?;
        let nodes = self.build_nodes(&fis)?;
        let graph = CascadeGraph::new(nodes, &self.cascade.terminal).map_err(|e| self.graph_error(e))?;
        TestProfile::new(
            self.metadata.kind,
            self.metadata.name.clone(),
            self.metadata.description.clone(),
            graph,
            self.record_schema.clone(),
        )
        .map_err(|e| invalid("/record_schema".into(), e.to_string()))
    }

    fn build_variables(&self) -> Result<HashMap<&str, LinguisticVariable>, ConfigError> {
        let mut out = HashMap::new();
        for (i, doc) in self.variables.iter().enumerate() {
            let mut terms = Vec::with_capacity(doc.terms.len());
            for (j, term) in doc.terms.iter().enumerate() {
                let [a, b, c] = term.mf;
                let mf = TriangularMf::new(a, b, c).map_err(|_| {
                    invalid(
                        Pointer(&[&"variables", &i, &"terms", &j, &"mf"]).to_string(),
                        format!("{}.{}: [{a}, {b}, {c}] violates a <= b <= c", doc.name, term.label),
                    )
                })?;
                terms.push(Term::new(term.label.clone(), mf));
            }
            let [min, max] = doc.domain;
            let var = LinguisticVariable::new(
                doc.name.clone(),
                doc.unit.clone(),
                Domain::new(min, max),
                doc.polarity,
                terms,
            )
            .map_err(|e| {
                let pointer = match &e {
                    FisError::MfOutsideDomain { name, .. }
                    | FisError::PointMf { name }
                    | FisError::Duplicate { name, .. } => name
                        .rsplit_once('.')
                        .and_then(|(_, label)| doc.terms.iter().position(|t| t.label == label))
                        .map(|j| Pointer(&[&"variables", &i, &"terms", &j]).to_string()),
                    _ => None,
                };
                invalid(
                    pointer.unwrap_or_else(|| Pointer(&[&"variables", &i]).to_string()),
                    e.to_string(),
                )
            })?;
            let assumed = self.metadata.assumed.contains(&doc.name);
            if out.insert(doc.name.as_str(), var.with_assumed(assumed)).is_some() {
                return Err(invalid(
                    Pointer(&[&"variables", &i, &"name"]).to_string(),
                    format!("duplicate variable {:?}", doc.name),
                ));
            }
        }
        for (k, name) in self.metadata.assumed.iter().enumerate() {
            if !out.contains_key(name.as_str()) {
                return Err(invalid(
                    Pointer(&[&"metadata", &"assumed", &k]).to_string(),
                    format!("unknown variable {name:?}"),
                ));
            }
        }
        Ok(out)
    }

    fn build_fis(
        &self,
        variables: &HashMap<&str, LinguisticVariable>,
    ) -> Result<HashMap<&str, SugenoFis>, ConfigError> {
        let mut out = HashMap::new();
        for (k, doc) in self.fis.iter().enumerate() {
            let at = |rest: &[&dyn std::fmt::Display]| {
                let mut parts: Vec<&dyn std::fmt::Display> = vec![&"fis", &k];
                parts.extend_from_slice(rest);
                Pointer(&parts).to_string()
            };
            let inputs = doc
                .inputs
                .iter()
                .enumerate()
                .map(|(m, name)| {
                    variables
                        .get(name.as_str())
                        .cloned()
                        .ok_or_else(|| invalid(at(&[&"inputs", &m]), format!("unknown variable {name:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let levels = match &doc.output {
                None => OutputLevels::default(),
                Some(levels) => {
                    OutputLevels::new(levels.clone()).map_err(|e| invalid(at(&[&"output"]), e.to_string()))?
                }
            };
            let rules = match &doc.rules {
                RulesDoc::Generate(generate) => {
                    for key in generate.polarity.keys() {
                        if !doc.inputs.contains(key) {
                            return Err(invalid(
                                at(&[&"rules", &"polarity", key]),
                                format!("{key:?} is not an input of {}", doc.name),
                            ));
                        }
                    }
                    if let Some(over) = &generate.over {
                        for (k, key) in over.iter().enumerate() {
                            if !doc.inputs.contains(key) {
                                return Err(invalid(
                                    at(&[&"rules", &"over", &k]),
                                    format!("{key:?} is not an input of {}", doc.name),
                                ));
                            }
                        }
                    }
                    let oriented: Vec<LinguisticVariable> = inputs
                        .iter()
                        .filter(|v| generate.over.as_ref().is_none_or(|o| o.iter().any(|n| n == v.name())))
                        .map(|v| match generate.polarity.get(v.name()) {
                            Some(p) => v.clone().with_polarity(Some(*p)),
                            None => v.clone(),
                        })
                        .collect();
                    generate_default_rulebase(&oriented, &levels)
                        .map_err(|e| invalid(at(&[&"rules"]), e.to_string()))?
                }
                RulesDoc::Explicit(rules) => rules
                    .iter()
                    .map(|r| {
                        Rule::new(
                            r.antecedent
                                .iter()
                                .map(|(v, t)| Clause::new(v.clone(), t.clone()))
                                .collect(),
                            r.then.clone(),
                        )
                        .with_weight(r.weight)
                    })
                    .collect(),
            };
            let fis = SugenoFis::new(doc.name.clone(), inputs, levels, rules, doc.tnorm).map_err(|e| {
                let path = match &e {
                    FisError::InvalidRule { rule, .. } if matches!(doc.rules, RulesDoc::Explicit(_)) => {
                        at(&[&"rules", rule])
                    }
                    _ => at(&[]),
                };
                invalid(path, e.to_string())
            })?;
            if out.insert(doc.name.as_str(), fis).is_some() {
                return Err(invalid(at(&[&"name"]), format!("duplicate fis {:?}", doc.name)));
            }
        }
        Ok(out)
    }

    fn build_nodes(&self, fis: &HashMap<&str, SugenoFis>) -> Result<Vec<CascadeNode>, ConfigError> {
        let mut nodes = Vec::with_capacity(self.cascade.nodes.len());
        for (i, doc) in self.cascade.nodes.iter().enumerate() {
            let at = |rest: &[&dyn std::fmt::Display]| {
                let mut parts: Vec<&dyn std::fmt::Display> = vec![&"cascade", &"nodes", &i];
                parts.extend_from_slice(rest);
                Pointer(&parts).to_string()
            };
            let node = match (&doc.fis, doc.constant) {
                (Some(name), None) => {
                    let f = fis
                        .get(name.as_str())
                        .ok_or_else(|| invalid(at(&[&"fis"]), format!("unknown fis {name:?}")))?;
                    if let Some(extra) = doc.bindings.keys().find(|k| f.input_index(k).is_none()) {
                        return Err(invalid(
                            at(&[&"bindings", extra]),
                            format!("{extra:?} is not an input of {name}"),
                        ));
                    }
                    let bindings = f
                        .inputs()
                        .iter()
                        .map(|v| {
                            doc.bindings.get(v.name()).cloned().ok_or_else(|| {
                                invalid(at(&[&"bindings"]), format!("input {:?} is not bound", v.name()))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    CascadeNode::fis(doc.name.clone(), doc.axis, f.clone(), bindings)
                }
                (None, Some(value)) => {
                    if !doc.bindings.is_empty() {
                        return Err(invalid(at(&[&"bindings"]), "a constant node takes no bindings"));
                    }
                    CascadeNode::constant(doc.name.clone(), doc.axis, value)
                }
                _ => return Err(invalid(at(&[]), "a node needs exactly one of \"fis\" or \"constant\"")),
            };
            nodes.push(node);
        }
        Ok(nodes)
    }

    fn graph_error(&self, err: CascadeError) -> ConfigError {
        let node_path = |name: &str| {
            self.cascade
                .nodes
                .iter()
                .position(|n| n.name == name)
                .map(|i| Pointer(&[&"cascade", &"nodes", &i]).to_string())
        };
        let path = match &err {
            CascadeError::InvalidNode { node, .. } | CascadeError::DuplicateNode(node) => node_path(node),
            _ => None,
        };
        invalid(path.unwrap_or_else(|| "/cascade".into()), err.to_string())
    }
}

fn variable_doc(var: &LinguisticVariable) -> VariableDoc {
    VariableDoc {
        name: var.name().to_string(),
        unit: var.unit().to_string(),
        domain: [var.domain().min, var.domain().max],
        polarity: var.polarity(),
        terms: var
            .terms()
            .iter()
            .map(|t| TermDoc {
                label: t.label.clone(),
                mf: t.mf.params(),
            })
            .collect(),
    }
}

fn fis_doc(fis: &SugenoFis) -> FisDoc {
    FisDoc {
        name: fis.name().to_string(),
        inputs: fis.inputs().iter().map(|v| v.name().to_string()).collect(),
        tnorm: fis.tnorm(),
        output: (*fis.output() != OutputLevels::default()).then(|| fis.output().levels().to_vec()),
        rules: RulesDoc::Explicit(
            fis.rules()
                .iter()
                .map(|r| RuleDoc {
                    antecedent: r
                        .antecedent
                        .iter()
                        .map(|c| (c.variable.clone(), c.term.clone()))
                        .collect(),
                    then: r.consequent.clone(),
                    weight: r.weight,
                })
                .collect(),
        ),
    }
}
