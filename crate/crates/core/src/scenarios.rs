//! Scenario files and the built-in example catalog.
//!
//! A scenario file is a JSON object:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "name": "two agents",
//!   "n": 2,
//!   "edges": [[1, 2]],
//!   "theta": ["pi/4", "-pi/4"],
//!   "initial": [[0.0, 0.0], [1.0, 0.0]],
//!   "horizon": 50.0,
//!   "step": 0.001
//! }
//! ```
//!
//! Agents and edges are numbered from 1. `initial`, `horizon` and `step` are
//! optional. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::rotation::AngleLiteral;
use crate::simulator::{InvalidScenario, Scenario};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Invalid(InvalidScenario),
    #[error("unknown builtin `{name}`; available: {}", available.join(", "))]
    UnknownBuiltin { name: String, available: Vec<String> },
}

fn field(field: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

/// On-disk layout of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format_version: u32,
    pub name: String,
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub theta: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario, ScenarioError> {
        if self.format_version != FORMAT_VERSION {
            return Err(field(
                "format_version",
                format!("unsupported version {}, expected {FORMAT_VERSION}", self.format_version),
            ));
        }
        if self.n == 0 {
            return Err(field("n", "at least one agent is required"));
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, &[i, j]) in self.edges.iter().enumerate() {
            if i == 0 || j == 0 || i > self.n || j > self.n {
                return Err(field(
                    format!("edges[{k}]"),
                    format!("[{i}, {j}] must name agents 1..={}", self.n),
                ));
            }
            edges.push((i - 1, j - 1));
        }
        let graph = Graph::new_undirected(self.n, &edges).map_err(|e| match e {
            GraphError::SelfLoop(i) => field("edges", format!("self-loop on agent {}", i + 1)),
            other => field("edges", other),
        })?;
        if self.theta.len() != self.n {
            return Err(field(
                "theta",
                format!("{} angles given for {} agents", self.theta.len(), self.n),
            ));
        }
        let angles = self
            .theta
            .iter()
            .enumerate()
            .map(|(k, t)| AngleLiteral::parse(t).map_err(|e| field(format!("theta[{k}]"), e)))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(initial) = &self.initial {
            if initial.len() != self.n {
                return Err(field(
                    "initial",
                    format!("{} positions given for {} agents", initial.len(), self.n),
                ));
            }
        }
        let mut s = Scenario::new(self.name, graph, angles, self.initial).map_err(locate)?;
        if let Some(h) = self.horizon {
            s = s.with_horizon(h).map_err(locate)?;
        }
        if let Some(h) = self.step {
            s = s.with_step(h).map_err(locate)?;
        }
        Ok(s)
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            name: s.label().to_string(),
            n: s.graph().n(),
            edges: s.graph().edges().iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            theta: s.angles().iter().map(|a| a.text().to_string()).collect(),
            initial: Some(s.initial().to_vec()),
            horizon: Some(s.horizon()),
            step: Some(s.step()),
        }
    }
}

fn locate(e: InvalidScenario) -> ScenarioError {
    match &e {
        InvalidScenario::Horizon(_) => field("horizon", e),
        InvalidScenario::Step(_)
        | InvalidScenario::StepExceedsHorizon { .. }
        | InvalidScenario::Unstable { .. } => field("step", e),
        InvalidScenario::NonFiniteInitial { agent } => field(format!("initial[{}]", agent - 1), e),
        InvalidScenario::InitialCount { .. } => field("initial", e),
        InvalidScenario::AngleCount { .. } => field("theta", e),
        _ => ScenarioError::Invalid(e),
    }
}

pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_scenario()
}

pub fn serialize(s: &Scenario) -> String {
    let mut text = serde_json::to_string_pretty(&ScenarioFile::from_scenario(s))
        .expect("scenario files contain only finite numbers and strings");
    text.push('\n');
    text
}

struct Entry {
    key: &'static str,
    summary: &'static str,
    n: usize,
    edges: &'static [[usize; 2]],
    theta: &'static [&'static str],
    horizon: Option<f64>,
}

const PAIR: &[[usize; 2]] = &[[1, 2]];
const TRIANGLE: &[[usize; 2]] = &[[1, 2], [1, 3], [2, 3]];
const FIVE: &[[usize; 2]] = &[[1, 2], [1, 3], [1, 4], [1, 5], [2, 3], [3, 5], [4, 5]];

const CATALOG: &[Entry] = &[
    Entry { key: "ex1-case1", summary: "two agents, no misalignment", n: 2, edges: PAIR, theta: &["0", "0"], horizon: None },
    Entry { key: "ex1-case2-a", summary: "two agents, equal acute angles", n: 2, edges: PAIR, theta: &["pi/4", "pi/4"], horizon: None },
    Entry { key: "ex1-case2-b", summary: "two agents, opposite acute angles", n: 2, edges: PAIR, theta: &["pi/4", "-pi/4"], horizon: None },
    Entry { key: "ex1-case2-c", summary: "two agents, unequal acute angles", n: 2, edges: PAIR, theta: &["pi/4", "-pi/3"], horizon: None },
    Entry { key: "ex1-case2-d", summary: "two agents, angles near a right angle", n: 2, edges: PAIR, theta: &["pi/2.5", "-pi/2.2"], horizon: None },
    Entry { key: "ex1-case3-a", summary: "two agents, opposite right angles (parallel drift)", n: 2, edges: PAIR, theta: &["pi/2", "-pi/2"], horizon: None },
    Entry { key: "ex1-case3-b", summary: "two agents, obtuse and right angle", n: 2, edges: PAIR, theta: &["pi/2+pi/4", "-pi/2"], horizon: None },
    Entry { key: "ex1-case3-c", summary: "two agents, obtuse and right angle, same side", n: 2, edges: PAIR, theta: &["pi/2+pi/4", "pi/2"], horizon: None },
    Entry { key: "ex1-case3-d", summary: "two agents, slightly obtuse and slightly negative", n: 2, edges: PAIR, theta: &["pi/2+pi/18", "-pi/18"], horizon: None },
    Entry { key: "ex1-case4-a", summary: "two agents, equal obtuse angles", n: 2, edges: PAIR, theta: &["pi/2+pi/4", "pi/2+pi/4"], horizon: None },
    Entry { key: "ex1-case4-b", summary: "two agents, opposite obtuse angles", n: 2, edges: PAIR, theta: &["pi/2+pi/4", "-pi/2-pi/4"], horizon: None },
    Entry { key: "ex2-case1", summary: "five agents, no misalignment", n: 5, edges: FIVE, theta: &["0", "0", "0", "0", "0"], horizon: None },
    Entry { key: "ex2-case2", summary: "five agents, small mixed angles", n: 5, edges: FIVE, theta: &["pi/6", "-pi/8", "pi/9", "-pi/18", "pi/25"], horizon: None },
    Entry { key: "ex2-case3", summary: "five agents, angles near a right angle", n: 5, edges: FIVE, theta: &["pi/2.1", "-pi/2.2", "pi/2.1", "-pi/2.05", "-pi/4"], horizon: Some(200.0) },
    Entry { key: "ex2-case4", summary: "five agents, two obtuse angles", n: 5, edges: FIVE, theta: &["pi/6", "-pi/2-pi/10", "pi/9", "-pi/18", "pi/2+pi/10"], horizon: Some(600.0) },
    Entry { key: "ex2-case5", summary: "five agents, one obtuse angle", n: 5, edges: FIVE, theta: &["pi/1.8", "pi/18", "0", "-pi/18", "-pi/8"], horizon: Some(200.0) },
    Entry { key: "ex2-case6", summary: "five agents, obtuse angle on the hub", n: 5, edges: FIVE, theta: &["pi/2+pi/8", "0", "0", "0", "0"], horizon: None },
    Entry { key: "ex3-a", summary: "three agents, one obtuse angle, converging", n: 3, edges: TRIANGLE, theta: &["pi/1.9", "-pi/3", "-pi/3"], horizon: None },
    Entry { key: "ex3-b", summary: "three agents, one obtuse angle, diverging", n: 3, edges: TRIANGLE, theta: &["pi/1.6", "-pi/3", "-pi/3"], horizon: None },
];

/// Catalog keys with one-line summaries.
pub fn builtin_list() -> Vec<(&'static str, &'static str)> {
    CATALOG.iter().map(|e| (e.key, e.summary)).collect()
}

pub fn builtin_keys() -> Vec<&'static str> {
    CATALOG.iter().map(|e| e.key).collect()
}

pub fn builtin(name: &str) -> Result<Scenario, ScenarioError> {
    let Some(entry) = CATALOG.iter().find(|e| e.key == name) else {
        return Err(ScenarioError::UnknownBuiltin {
            name: name.to_string(),
            available: builtin_keys().into_iter().map(String::from).collect(),
        });
    };
    ScenarioFile {
        format_version: FORMAT_VERSION,
        name: entry.key.to_string(),
        n: entry.n,
        edges: entry.edges.to_vec(),
        theta: entry.theta.iter().map(|t| t.to_string()).collect(),
        initial: None,
        horizon: entry.horizon,
        step: None,
    }
    .into_scenario()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const MINIMAL: &str = r#"{"format_version": 1, "name": "pair", "n": 2, "edges": [[1, 2]], "theta": ["0", "0"]}"#;

    #[test]
    fn minimal_file_uses_defaults() {
        let s = parse(MINIMAL).unwrap();
        assert_eq!(s.graph(), &Graph::path(2).unwrap());
        assert_eq!(s.profile().angles(), &[0.0, 0.0]);
        assert_eq!(s.initial(), &[[2.0, 0.0], [-2.0, 2.0 * PI.sin()]]);
        assert_eq!(s.horizon(), crate::simulator::DEFAULT_HORIZON);
        assert_eq!(s.step(), crate::simulator::DEFAULT_STEP);
        let reference = builtin("ex1-case1").unwrap();
        assert_eq!(s.profile(), reference.profile());
        assert_eq!(s.graph(), reference.graph());
    }

    #[test]
    fn example_two_angles_from_file() {
        let text = r#"{
            "format_version": 1, "name": "five", "n": 5,
            "edges": [[1,2],[1,3],[1,4],[1,5],[2,3],[3,5],[4,5]],
            "theta": ["pi/6", "-pi/8", "pi/9", "-pi/18", "pi/25"]
        }"#;
        let s = parse(text).unwrap();
        assert_eq!(s.profile(), builtin("ex2-case2").unwrap().profile());
    }

    #[test]
    fn builtin_contents() {
        let s = builtin("ex2-case4").unwrap();
        let want = [PI / 6.0, -PI / 2.0 - PI / 10.0, PI / 9.0, -PI / 18.0, PI / 2.0 + PI / 10.0];
        assert_eq!(s.profile().angles(), &want);
        assert_eq!(s.graph().n(), 5);

        let s = builtin("ex3-b").unwrap();
        assert_eq!(s.graph(), &Graph::complete(3).unwrap());
        assert_eq!(s.profile().angles(), &[PI / 1.6, -PI / 3.0, -PI / 3.0]);

        let s = builtin("ex1-case3-a").unwrap();
        assert_eq!(s.graph(), &Graph::path(2).unwrap());
        assert_eq!(s.profile().angles(), &[PI / 2.0, -PI / 2.0]);
    }

    #[test]
    fn unknown_builtin_lists_keys() {
        let err = builtin("ex9").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("ex9") && msg.contains("ex1-case1") && msg.contains("ex3-b"), "{msg}");
    }

    #[test]
    fn every_builtin_round_trips() {
        for key in builtin_keys() {
            let s = builtin(key).unwrap();
            let text = serialize(&s);
            assert_eq!(parse(&text).unwrap(), s, "{key}");
        }
    }

    #[test]
    fn radian_scenarios_round_trip() {
        let s = Scenario::from_radians("r", Graph::complete(3).unwrap(), &[0.1, -2.9, 1e-7], None)
            .unwrap()
            .with_horizon(12.5)
            .unwrap();
        assert_eq!(parse(&serialize(&s)).unwrap(), s);
    }

    fn field_of(text: &str) -> String {
        match parse(text) {
            Err(ScenarioError::Field { field, .. }) => field,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn diagnostics() {
        let t = MINIMAL.replace(r#"["0", "0"]"#, r#"["0"]"#);
        assert_eq!(field_of(&t), "theta");
        let t = MINIMAL.replace(r#"["0", "0"]"#, r#"["0", "pi/x"]"#);
        assert_eq!(field_of(&t), "theta[1]");
        let t = MINIMAL.replace("[[1, 2]]", "[[1, 3]]");
        assert_eq!(field_of(&t), "edges[0]");
        let t = MINIMAL.replace("[[1, 2]]", "[[2, 2]]");
        assert_eq!(field_of(&t), "edges");
        let t = MINIMAL.replace(r#""format_version": 1"#, r#""format_version": 2"#);
        assert_eq!(field_of(&t), "format_version");
        let t = MINIMAL.replace('}', r#", "initial": [[0, 0]]}"#);
        assert_eq!(field_of(&t), "initial");
        let t = MINIMAL.replace('}', r#", "step": 2.0, "horizon": 10}"#);
        assert_eq!(field_of(&t), "step");
        let t = MINIMAL.replace('}', r#", "horizon": -1}"#);
        assert_eq!(field_of(&t), "horizon");

        let t = MINIMAL.replace('}', r#", "colour": "red"}"#);
        match parse(&t) {
            Err(ScenarioError::Syntax { line, message, .. }) => {
                assert_eq!(line, 1);
                assert!(message.contains("colour"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        match parse("{\n  \"format_version\": 1,\n  \"name\": \n}") {
            Err(ScenarioError::Syntax { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }
}
