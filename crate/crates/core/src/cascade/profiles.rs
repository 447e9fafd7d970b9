//! Built-in variables and the six test profiles.

use crate::fis::{Domain, LinguisticVariable, OutputLevels, Polarity, SugenoFis, TNorm};

use super::{
    generate_default_rulebase, Axis, Binding, CascadeError, CascadeGraph, CascadeNode, FieldSpec, TestKind, TestProfile,
};

/// One row of the variable catalog.
#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub unit: &'static str,
    pub polarity: Polarity,
    pub mfs: [[f64; 3]; 3],
    /// Parameters are not backed by published measurements.
    pub assumed: bool,
}

const fn entry(name: &'static str, unit: &'static str, polarity: Polarity, mfs: [[f64; 3]; 3]) -> CatalogEntry {
    CatalogEntry {
        name,
        unit,
        polarity,
        mfs,
        assumed: false,
    }
}

use Polarity::{Benefit, Cost};

/// Triangular low/medium/high parameters for every raw input.
/// The domain of each variable spans its outer feet.
pub const CATALOG: [CatalogEntry; 14] = [
    entry(
        "Area",
        "m2",
        Benefit,
        [[0.0, 0.0, 2.7], [0.6, 3.0, 5.4], [3.3, 6.0, 6.0]],
    ),
    entry(
        "Light",
        "lux",
        Benefit,
        [[0.0, 0.0, 337.5], [75.0, 375.0, 675.0], [412.5, 750.0, 750.0]],
    ),
    entry(
        "Vert",
        "deg",
        Cost,
        [[0.0, 0.0, 37.5], [7.5, 45.0, 82.5], [52.5, 90.0, 90.0]],
    ),
    entry(
        "Crash",
        "count",
        Cost,
        [[0.0, 0.0, 1.25], [0.5, 1.5, 2.5], [1.75, 3.0, 3.0]],
    ),
    entry(
        "Rollovers",
        "count",
        Cost,
        [[0.0, 0.0, 1.25], [0.5, 1.5, 2.5], [1.75, 3.0, 3.0]],
    ),
    entry(
        "Comp",
        "fraction",
        Benefit,
        [[0.0, 0.0, 0.55], [0.15, 0.6, 0.92], [0.7, 1.0, 1.0]],
    ),
    entry(
        "Yaw/Pitch",
        "deg",
        Cost,
        [[0.0, 0.0, 4.17], [0.83, 5.0, 9.12], [5.83, 10.0, 10.0]],
    ),
    entry("VR", "m", Cost, [[0.6, 0.6, 1.1], [0.7, 1.2, 1.7], [1.3, 1.8, 1.8]]),
    entry("LR", "m", Cost, [[1.2, 1.2, 2.2], [1.4, 2.4, 3.4], [2.6, 3.6, 3.6]]),
    entry(
        "Coverage",
        "fraction",
        Benefit,
        [[0.0, 0.0, 0.55], [0.15, 0.6, 0.92], [0.7, 1.0, 1.0]],
    ),
    entry(
        "Cs Detected",
        "depth",
        Benefit,
        [[0.0, 0.0, 50.0], [10.0, 50.0, 90.0], [50.0, 100.0, 100.0]],
    ),
    entry(
        "Duration",
        "min",
        Cost,
        [[2.5, 2.5, 5.25], [3.05, 5.25, 7.45], [5.25, 8.0, 8.0]],
    ),
    entry(
        "Obs",
        "count",
        Cost,
        [[0.0, 0.0, 2.5], [1.0, 3.0, 5.0], [3.5, 6.0, 6.0]],
    ),
    // No published parameters; same relative layout as Area and Light over 0-2 m/s.
    CatalogEntry {
        name: "Speed",
        unit: "m/s",
        polarity: Benefit,
        mfs: [[0.0, 0.0, 0.9], [0.2, 1.0, 1.8], [1.1, 2.0, 2.0]],
        assumed: true,
    },
];

pub fn catalog_variable(name: &str) -> Option<LinguisticVariable> {
    let e = CATALOG.iter().find(|e| e.name == name)?;
    let domain = Domain::new(e.mfs[0][0], e.mfs[2][2]);
    let var = LinguisticVariable::three_level(e.name, e.unit, domain, Some(e.polarity), e.mfs)
        .expect("catalog entries are well formed");
    Some(var.with_assumed(e.assumed))
}

/// Input variable for a `[0, 1]` node output feeding the combiner.
pub fn axis_variable(name: &str) -> LinguisticVariable {
    LinguisticVariable::three_level(
        name,
        "score",
        Domain::new(0.0, 1.0),
        Some(Polarity::Benefit),
        [[0.0, 0.0, 0.5], [0.25, 0.5, 0.75], [0.5, 1.0, 1.0]],
    )
    .expect("axis variable is well formed")
}

/// The terminal FIS. HI is an input but no rule mentions it, so with HI at
/// its constant 0 the surface is exactly the 3x3 EC/MC table.
pub fn combiner_fis() -> SugenoFis {
    let levels = OutputLevels::default();
    let ec = axis_variable("EC");
    let mc = axis_variable("MC");
    let rules = generate_default_rulebase(&[ec.clone(), mc.clone()], &levels).expect("axis variables carry a polarity");
    SugenoFis::new(
        "combiner",
        vec![ec, mc, axis_variable("HI")],
        levels,
        rules,
        TNorm::Product,
    )
    .expect("combiner rules reference known terms")
}

/// (field name, catalog entry) pairs for each axis of a test.
struct Layout {
    ec: &'static [(&'static str, &'static str)],
    mc: &'static [(&'static str, &'static str)],
    description: &'static str,
}

fn layout(kind: TestKind) -> Layout {
    match kind {
        TestKind::RuntimeEndurance => Layout {
            ec: &[("Obs", "Obs"), ("Light", "Light")],
            mc: &[("Crash", "Crash"), ("Speed", "Speed")],
            description: "Runtime endurance: continuous figure-8 flight",
        },
        TestKind::ThroughApertures => Layout {
            ec: &[("Area", "Area"), ("Light", "Light")],
            mc: &[("Crash", "Crash"), ("Comp", "Comp")],
            description: "Navigation through apertures (doorway, window)",
        },
        TestKind::ThroughCorridors => Layout {
            ec: &[("Area", "Area"), ("Light", "Light"), ("Vert", "Vert")],
            mc: &[("Coverage", "Coverage"), ("Crash", "Crash"), ("Duration", "Duration")],
            description: "Navigation through confined spaces (hallway, tunnel, stairwell, shaft)",
        },
        TestKind::Takeoff => Layout {
            ec: TAKEOFF_EC,
            mc: TAKEOFF_MC,
            description: "Takeoff from sloped or obstructed ground",
        },
        TestKind::LandPerch => Layout {
            ec: TAKEOFF_EC,
            mc: TAKEOFF_MC,
            description: "Land or perch on sloped or obstructed ground",
        },
        TestKind::RoomClearing => Layout {
            ec: &[("Light", "Light"), ("Obs", "Obs")],
            mc: &[
                ("Crash", "Crash"),
                ("Duration", "Duration"),
                ("Coverage", "Coverage"),
                ("Cs Detected", "Cs Detected"),
            ],
            description: "Room clearing: visual inspection of acuity targets under a time limit",
        },
    }
}

// Yaw and pitch are separate fields sharing one set of membership functions.
const TAKEOFF_EC: &[(&str, &str)] = &[("Yaw", "Yaw/Pitch"), ("Pitch", "Yaw/Pitch"), ("VR", "VR"), ("LR", "LR")];
const TAKEOFF_MC: &[(&str, &str)] = &[("Crash", "Crash"), ("Comp", "Comp"), ("Rollovers", "Rollovers")];

fn axis_node(axis: Axis, inputs: &[(&str, &str)]) -> Result<(CascadeNode, Vec<FieldSpec>), CascadeError> {
    let vars: Vec<LinguisticVariable> = inputs
        .iter()
        .map(|(field, entry)| {
            catalog_variable(entry)
                .map(|v| v.renamed(*field))
                .ok_or_else(|| CascadeError::UnknownKind(format!("catalog entry {entry}")))
        })
        .collect::<Result<_, _>>()?;
    let levels = OutputLevels::default();
    let rules = generate_default_rulebase(&vars, &levels)?;
    let fields = vars
        .iter()
        .map(|v| FieldSpec {
            name: v.name().to_string(),
            unit: v.unit().to_string(),
        })
        .collect();
    let bindings = vars.iter().map(|v| Binding::Field(v.name().to_string())).collect();
    let fis = SugenoFis::new(axis.as_str(), vars, levels, rules, TNorm::Product)?;
    Ok((CascadeNode::fis(axis.as_str(), Some(axis), fis, bindings), fields))
}

/// Builds one of the built-in test profiles.
pub fn build_profile(kind: TestKind) -> TestProfile {
    let layout = layout(kind);
    let (ec, mut schema) = axis_node(Axis::EC, layout.ec).expect("built-in EC node");
    let (mc, mc_fields) = axis_node(Axis::MC, layout.mc).expect("built-in MC node");
    schema.extend(mc_fields);
    let hi = CascadeNode::constant("HI", Some(Axis::HI), 0.0);
    let combiner = CascadeNode::fis(
        "combiner",
        None,
        combiner_fis(),
        vec![
            Binding::Node("EC".into()),
            Binding::Node("MC".into()),
            Binding::Node("HI".into()),
        ],
    );
    let graph = CascadeGraph::new(vec![ec, mc, hi, combiner], "combiner").expect("built-in graph");
    TestProfile::new(kind, kind.as_str(), layout.description, graph, schema).expect("built-in schema matches bindings")
}
