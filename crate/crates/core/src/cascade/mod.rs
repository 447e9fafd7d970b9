//! Cascaded FIS graphs: axis nodes feeding a terminal combiner.

mod profiles;
mod rulegen;
mod surface;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fis::{Domain, FisError, SugenoFis};

pub use profiles::{axis_variable, build_profile, catalog_variable, combiner_fis, CATALOG};
pub use rulegen::generate_default_rulebase;
pub use surface::{surface_grid, SurfaceGrid, SurfacePoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CascadeError {
    #[error(transparent)]
    Fis(#[from] FisError),
    #[error("unknown test kind {0:?}")]
    UnknownKind(String),
    #[error("duplicate node {0:?}")]
    DuplicateNode(String),
    #[error("node {node}: {message}")]
    InvalidNode { node: String, message: String },
    #[error("graph: {0}")]
    InvalidGraph(String),
    #[error("record schema: {0}")]
    SchemaMismatch(String),
    #[error("record: missing field {0:?}")]
    MissingField(String),
    #[error("record: unexpected field {0:?}")]
    UnexpectedField(String),
    #[error("record: duplicate field {0:?}")]
    DuplicateField(String),
    #[error("record: field {field:?} is not finite ({value})")]
    NonFinite { field: String, value: f64 },
    #[error("rule generation: {0}")]
    RuleGeneration(String),
    #[error("surface: {0}")]
    Surface(String),
}

/// The three evaluation axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    /// Environmental complexity.
    EC,
    /// Mission complexity.
    MC,
    /// Human independence.
    HI,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::EC, Axis::MC, Axis::HI];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::EC => "EC",
            Axis::MC => "MC",
            Axis::HI => "HI",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    RuntimeEndurance,
    ThroughApertures,
    ThroughCorridors,
    Takeoff,
    LandPerch,
    RoomClearing,
}

impl TestKind {
    pub const ALL: [TestKind; 6] = [
        TestKind::RuntimeEndurance,
        TestKind::ThroughApertures,
        TestKind::ThroughCorridors,
        TestKind::Takeoff,
        TestKind::LandPerch,
        TestKind::RoomClearing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::RuntimeEndurance => "runtime_endurance",
            TestKind::ThroughApertures => "through_apertures",
            TestKind::ThroughCorridors => "through_corridors",
            TestKind::Takeoff => "takeoff",
            TestKind::LandPerch => "land_perch",
            TestKind::RoomClearing => "room_clearing",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestKind {
    type Err = CascadeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TestKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| CascadeError::UnknownKind(s.to_string()))
    }
}

/// Where a FIS input takes its value from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    /// A raw field of the trial record.
    Field(String),
    /// The crisp output of another node.
    Node(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeSource {
    /// Bindings are given in the FIS input order.
    Fis {
        fis: SugenoFis,
        bindings: Vec<Binding>,
    },
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeNode {
    pub name: String,
    pub axis: Option<Axis>,
    pub source: NodeSource,
}

impl CascadeNode {
    pub fn fis(name: impl Into<String>, axis: Option<Axis>, fis: SugenoFis, bindings: Vec<Binding>) -> Self {
        Self {
            name: name.into(),
            axis,
            source: NodeSource::Fis { fis, bindings },
        }
    }

    pub fn constant(name: impl Into<String>, axis: Option<Axis>, value: f64) -> Self {
        Self {
            name: name.into(),
            axis,
            source: NodeSource::Constant(value),
        }
    }

    pub fn as_fis(&self) -> Option<&SugenoFis> {
        match &self.source {
            NodeSource::Fis { fis, .. } => Some(fis),
            NodeSource::Constant(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Field(usize),
    Node(usize),
}

/// A validated DAG of FIS nodes with a single terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeGraph {
    nodes: Vec<CascadeNode>,
    terminal: usize,
    order: Vec<usize>,
    fields: Vec<String>,
    slots: Vec<Vec<Slot>>,
    axis_nodes: [usize; 3],
}

impl CascadeGraph {
    pub fn new(nodes: Vec<CascadeNode>, terminal: &str) -> Result<Self, CascadeError> {
        let mut index = HashMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.name.as_str(), i).is_some() {
                return Err(CascadeError::DuplicateNode(node.name.clone()));
            }
        }
        let terminal = *index
            .get(terminal)
            .ok_or_else(|| CascadeError::InvalidGraph(format!("terminal {terminal:?} is not a node")))?;
        let invalid = |node: &CascadeNode, message: String| CascadeError::InvalidNode {
            node: node.name.clone(),
            message,
        };

        let mut fields: Vec<String> = Vec::new();
        let mut slots = Vec::with_capacity(nodes.len());
        let mut edges: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            let mut node_slots = Vec::new();
            match &node.source {
                NodeSource::Constant(v) => {
                    if !(0.0..=1.0).contains(v) {
                        return Err(invalid(node, format!("constant {v} outside [0, 1]")));
                    }
                }
                NodeSource::Fis { fis, bindings } => {
                    if bindings.len() != fis.inputs().len() {
                        return Err(invalid(
                            node,
                            format!("{} bindings for {} inputs", bindings.len(), fis.inputs().len()),
                        ));
                    }
                    for (var, binding) in fis.inputs().iter().zip(bindings) {
                        match binding {
                            Binding::Field(name) => {
                                let fi = match fields.iter().position(|f| f == name) {
                                    Some(fi) => fi,
                                    None => {
                                        fields.push(name.clone());
                                        fields.len() - 1
                                    }
                                };
                                node_slots.push(Slot::Field(fi));
                            }
                            Binding::Node(src) => {
                                let j = *index.get(src.as_str()).ok_or_else(|| {
                                    invalid(node, format!("{} bound to unknown node {src:?}", var.name()))
                                })?;
                                if j == i {
                                    return Err(invalid(node, "bound to itself".into()));
                                }
                                if var.domain() != Domain::new(0.0, 1.0) {
                                    return Err(invalid(
                                        node,
                                        format!("{} takes a node output but its domain is not [0, 1]", var.name()),
                                    ));
                                }
                                edges[j].push(i);
                                node_slots.push(Slot::Node(j));
                            }
                        }
                    }
                }
            }
            slots.push(node_slots);
        }

        let order =
            topological_order(&edges).ok_or_else(|| CascadeError::InvalidGraph("cycle between nodes".into()))?;

        // Every node must reach the terminal.
        let mut feeds = vec![false; nodes.len()];
        feeds[terminal] = true;
        for &i in order.iter().rev() {
            if edges[i].iter().any(|&j| feeds[j]) {
                feeds[i] = true;
            }
        }
        if let Some(i) = feeds.iter().position(|f| !f) {
            return Err(invalid(&nodes[i], "does not feed the terminal".into()));
        }
        if !edges[terminal].is_empty() {
            return Err(CascadeError::InvalidGraph("terminal node feeds another node".into()));
        }
        if nodes[terminal].axis.is_some() {
            return Err(CascadeError::InvalidGraph("terminal node carries an axis tag".into()));
        }

        let mut axis_nodes = [usize::MAX; 3];
        for (i, node) in nodes.iter().enumerate() {
            match node.axis {
                None if i != terminal => return Err(invalid(node, "non-terminal node without an axis tag".into())),
                None => {}
                Some(axis) => {
                    let slot = &mut axis_nodes[axis as usize];
                    if *slot != usize::MAX {
                        return Err(CascadeError::InvalidGraph(format!(
                            "more than one {} node",
                            axis.as_str()
                        )));
                    }
                    *slot = i;
                }
            }
        }
        if let Some(axis) = Axis::ALL.iter().find(|a| axis_nodes[**a as usize] == usize::MAX) {
            return Err(CascadeError::InvalidGraph(format!("no {} node", axis.as_str())));
        }

        Ok(Self {
            nodes,
            terminal,
            order,
            fields,
            slots,
            axis_nodes,
        })
    }

    pub fn nodes(&self) -> &[CascadeNode] {
        &self.nodes
    }

    pub fn node(&self, name: &str) -> Option<&CascadeNode> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn terminal(&self) -> &CascadeNode {
        &self.nodes[self.terminal]
    }

    /// Names of the nodes in evaluation order.
    pub fn evaluation_order(&self) -> Vec<&str> {
        self.order.iter().map(|&i| self.nodes[i].name.as_str()).collect()
    }

    /// Distinct raw fields, in order of first binding.
    pub fn fields(&self) -> &[String] {
        &self.fields
    }

    /// Every FIS in the graph, in node order.
    pub fn fis_nodes(&self) -> impl Iterator<Item = &SugenoFis> {
        self.nodes.iter().filter_map(CascadeNode::as_fis)
    }

    /// Finds a FIS by FIS name or by node name.
    pub fn find_fis(&self, name: &str) -> Option<&SugenoFis> {
        self.nodes
            .iter()
            .filter_map(|n| n.as_fis().map(|f| (n, f)))
            .find(|(n, f)| f.name() == name || n.name == name)
            .map(|(_, f)| f)
    }

    /// Variables bound to raw field `field`.
    pub fn field_variables<'a>(
        &'a self,
        field: &'a str,
    ) -> impl Iterator<Item = &'a crate::fis::LinguisticVariable> + 'a {
        self.nodes
            .iter()
            .filter_map(move |n| match &n.source {
                NodeSource::Fis { fis, bindings } => Some(
                    fis.inputs()
                        .iter()
                        .zip(bindings)
                        .filter(move |(_, b)| matches!(b, Binding::Field(f) if f == field))
                        .map(|(v, _)| v),
                ),
                NodeSource::Constant(_) => None,
            })
            .flatten()
    }

    /// Evaluates every node given field values in [`Self::fields`] order.
    /// Raw values are clamped to the domain of each variable they feed.
    pub fn evaluate_fields(&self, values: &[f64]) -> Result<AxisScores, CascadeError> {
        if values.len() != self.fields.len() {
            return Err(CascadeError::SchemaMismatch(format!(
                "{} values for {} fields",
                values.len(),
                self.fields.len()
            )));
        }
        let mut outputs = vec![f64::NAN; self.nodes.len()];
        let mut xs = Vec::new();
        for &i in &self.order {
            outputs[i] = match &self.nodes[i].source {
                NodeSource::Constant(v) => *v,
                NodeSource::Fis { fis, .. } => {
                    xs.clear();
                    for (var, slot) in fis.inputs().iter().zip(&self.slots[i]) {
                        let raw = match *slot {
                            Slot::Field(f) => values[f],
                            Slot::Node(j) => outputs[j],
                        };
                        xs.push(var.domain().clamp(raw));
                    }
                    fis.evaluate_at(&xs)?
                }
            };
        }
        Ok(AxisScores {
            ec: outputs[self.axis_nodes[Axis::EC as usize]],
            mc: outputs[self.axis_nodes[Axis::MC as usize]],
            hi: outputs[self.axis_nodes[Axis::HI as usize]],
            final_score: outputs[self.terminal],
        })
    }
}

fn topological_order(edges: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = edges.len();
    let mut indegree = vec![0usize; n];
    for targets in edges {
        for &t in targets {
            indegree[t] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).rev().collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop() {
        order.push(i);
        for &t in edges[i].iter().rev() {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.push(t);
            }
        }
    }
    (order.len() == n).then_some(order)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub unit: String,
}

/// Axis outputs and the combined score for one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisScores {
    pub ec: f64,
    pub mc: f64,
    pub hi: f64,
    #[serde(rename = "final")]
    pub final_score: f64,
}

/// A scored test: its cascade plus the raw record layout it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct TestProfile {
    kind: TestKind,
    name: String,
    description: String,
    graph: CascadeGraph,
    record_schema: Vec<FieldSpec>,
}

impl TestProfile {
    pub fn new(
        kind: TestKind,
        name: impl Into<String>,
        description: impl Into<String>,
        graph: CascadeGraph,
        record_schema: Vec<FieldSpec>,
    ) -> Result<Self, CascadeError> {
        let mut seen = HashSet::new();
        for spec in &record_schema {
            if !seen.insert(spec.name.as_str()) {
                return Err(CascadeError::SchemaMismatch(format!("duplicate field {:?}", spec.name)));
            }
            if !graph.fields().contains(&spec.name) {
                return Err(CascadeError::SchemaMismatch(format!(
                    "field {:?} is not bound to any variable",
                    spec.name
                )));
            }
        }
        if let Some(missing) = graph.fields().iter().find(|f| !seen.contains(f.as_str())) {
            return Err(CascadeError::SchemaMismatch(format!(
                "bound field {missing:?} is missing from the record schema"
            )));
        }
        Ok(Self {
            kind,
            name: name.into(),
            description: description.into(),
            graph,
            record_schema,
        })
    }

    pub fn kind(&self) -> TestKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn graph(&self) -> &CascadeGraph {
        &self.graph
    }

    pub fn record_schema(&self) -> &[FieldSpec] {
        &self.record_schema
    }

    pub fn field_names(&self) -> impl Iterator<Item = &str> {
        self.record_schema.iter().map(|f| f.name.as_str())
    }

    /// Scores one raw record; field order does not matter.
    pub fn evaluate<I, K>(&self, record: I) -> Result<AxisScores, CascadeError>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: AsRef<str>,
    {
        let fields = self.graph.fields();
        let mut values: Vec<Option<f64>> = vec![None; fields.len()];
        for (key, value) in record {
            let key = key.as_ref();
            let idx = fields
                .iter()
                .position(|f| f == key)
                .ok_or_else(|| CascadeError::UnexpectedField(key.to_string()))?;
            if !value.is_finite() {
                return Err(CascadeError::NonFinite {
                    field: key.to_string(),
                    value,
                });
            }
            if values[idx].replace(value).is_some() {
                return Err(CascadeError::DuplicateField(key.to_string()));
            }
        }
        let values = values
            .into_iter()
            .zip(fields)
            .map(|(v, f)| v.ok_or_else(|| CascadeError::MissingField(f.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        self.graph.evaluate_fields(&values)
    }
}

/// Free-function form of [`TestProfile::evaluate`].
pub fn evaluate_cascade<I, K>(profile: &TestProfile, record: I) -> Result<AxisScores, CascadeError>
where
    I: IntoIterator<Item = (K, f64)>,
    K: AsRef<str>,
{
    profile.evaluate(record)
}
