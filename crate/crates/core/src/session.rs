//! Feedback capture and the scripted scenario engine.
//!
//! A scenario is a list of steps; step `n` runs at tick `n`. Steps register
//! resources, emit viewpoints, record feedback, and assert on query results
//! under a per-assertion perspective.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{
    Agency, KnowledgeGraph, NewResource, Paradigm, Polarity, ResourceId, ResourceKind, Timestamp,
    ViewpointId, ViewpointType,
};
use crate::perspective::{build_map, PerspectiveSpec};
use crate::query::{nearest_via, shortest_paths, TIE_EPSILON};

/// An agent's reaction to a document, optionally with respect to a topic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub agent: ResourceId,
    pub document: ResourceId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<ResourceId>,
    pub polarity: Polarity,
    pub at: Timestamp,
}

fn require_kind(graph: &KnowledgeGraph, id: &str, expected: ResourceKind) -> Result<()> {
    let resource = graph.require(id)?;
    if resource.kind != expected {
        return Err(Error::KindMismatch {
            resource: id.to_owned(),
            expected: expected.name(),
            actual: resource.kind.name(),
        });
    }
    Ok(())
}

/// Appends `(agent, {agent, document}, (Feel, polarity), at)` and, when a
/// topic is given, `(agent, {document, topic}, (Feel, polarity), at)`.
///
/// All kinds are checked before anything is appended.
pub fn record_feedback(graph: &mut KnowledgeGraph, ev: &FeedbackEvent) -> Result<Vec<ViewpointId>> {
    require_kind(graph, ev.agent.as_str(), ResourceKind::Agent)?;
    require_kind(graph, ev.document.as_str(), ResourceKind::Document)?;
    if let Some(topic) = &ev.topic {
        require_kind(graph, topic.as_str(), ResourceKind::Topic)?;
    }
    let vtype = ViewpointType::new(Paradigm::Feel, ev.polarity);
    let mut ids = vec![graph.add_viewpoint(
        ev.agent.as_str(),
        ev.agent.as_str(),
        ev.document.as_str(),
        vtype,
        ev.at,
    )?];
    if let Some(topic) = &ev.topic {
        ids.push(graph.add_viewpoint(
            ev.agent.as_str(),
            ev.document.as_str(),
            topic.as_str(),
            vtype,
            ev.at,
        )?);
    }
    Ok(ids)
}

fn document_kind() -> ResourceKind {
    ResourceKind::Document
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearestExpectation {
    pub agent: ResourceId,
    pub document: ResourceId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    Resource {
        id: String,
        kind: ResourceKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        agency: Option<Agency>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Viewpoint {
        emitter: ResourceId,
        r2: ResourceId,
        r3: ResourceId,
        paradigm: Paradigm,
        polarity: Polarity,
    },
    Feedback {
        agent: ResourceId,
        document: ResourceId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        topic: Option<ResourceId>,
        polarity: Polarity,
    },
    /// All tied shortest paths from `source` to `target` equal `expect_paths`
    /// (an empty list means unreachable).
    AssertPaths {
        #[serde(default)]
        perspective: PerspectiveSpec,
        source: ResourceId,
        target: ResourceId,
        expect_paths: Vec<Vec<ResourceId>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_length: Option<f64>,
    },
    /// For each agent, the resource of `kind` its best route to `topic`
    /// passes through.
    AssertNearest {
        #[serde(default)]
        perspective: PerspectiveSpec,
        topic: ResourceId,
        #[serde(default = "document_kind")]
        kind: ResourceKind,
        expect: Vec<NearestExpectation>,
    },
    /// `targets` are all at the same distance from `origin` (route length
    /// through each target to `via`, when given).
    AssertEquidistant {
        #[serde(default)]
        perspective: PerspectiveSpec,
        origin: ResourceId,
        targets: Vec<ResourceId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        via: Option<ResourceId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_length: Option<f64>,
    },
}

impl Action {
    pub fn is_assertion(&self) -> bool {
        matches!(
            self,
            Action::AssertPaths { .. } | Action::AssertNearest { .. } | Action::AssertEquidistant { .. }
        )
    }

    fn name(&self) -> &'static str {
        match self {
            Action::Resource { .. } => "resource",
            Action::Viewpoint { .. } => "viewpoint",
            Action::Feedback { .. } => "feedback",
            Action::AssertPaths { .. } => "assert_paths",
            Action::AssertNearest { .. } => "assert_nearest",
            Action::AssertEquidistant { .. } => "assert_equidistant",
        }
    }

    /// Applies a mutating action at tick `at`. Assertions are rejected.
    pub fn apply(&self, graph: &mut KnowledgeGraph, at: Timestamp) -> Result<()> {
        match self {
            Action::Resource {
                id,
                kind,
                agency,
                label,
            } => {
                let mut new = NewResource::new(*kind).id(id).at(at);
                new.agency = *agency;
                new.label = label.clone();
                graph.add_resource(new)?;
            }
            Action::Viewpoint {
                emitter,
                r2,
                r3,
                paradigm,
                polarity,
            } => {
                graph.add_viewpoint(
                    emitter.as_str(),
                    r2.as_str(),
                    r3.as_str(),
                    ViewpointType::new(*paradigm, *polarity),
                    at,
                )?;
            }
            Action::Feedback {
                agent,
                document,
                topic,
                polarity,
            } => {
                record_feedback(
                    graph,
                    &FeedbackEvent {
                        agent: agent.clone(),
                        document: document.clone(),
                        topic: topic.clone(),
                        polarity: *polarity,
                        at,
                    },
                )?;
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "`{}` is an assertion, not a graph action",
                    self.name()
                )))
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Step {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub actions: Vec<Action>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub steps: Vec<Step>,
}

impl ScenarioScript {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::MalformedScript {
            step: 0,
            action: 0,
            reason: e.to_string(),
        })
    }
}

const APPLE_SCRIPT: &str = include_str!("../data/apple_scenario.json");

/// The five-step learners-and-apple scenario.
pub fn apple_script() -> ScenarioScript {
    ScenarioScript::from_json(APPLE_SCRIPT).expect("built-in script parses")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssertionOutcome {
    pub action: usize,
    pub kind: &'static str,
    pub passed: bool,
    pub expected: Value,
    pub actual: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub step: usize,
    pub passed: bool,
    pub assertions: Vec<AssertionOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub steps: Vec<StepReport>,
    pub passed_steps: usize,
    pub total_steps: usize,
}

impl ScenarioReport {
    pub fn all_passed(&self) -> bool {
        self.passed_steps == self.total_steps
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text rendering, numbers at six decimals.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let ok = step.assertions.iter().filter(|a| a.passed).count();
            let _ = writeln!(
                out,
                "step {}: {} ({}/{} assertions)",
                step.step,
                if step.passed { "pass" } else { "FAIL" },
                ok,
                step.assertions.len()
            );
            for a in &step.assertions {
                let _ = writeln!(
                    out,
                    "  [{}] action {} {}: expected {} actual {}",
                    if a.passed { "pass" } else { "FAIL" },
                    a.action,
                    a.kind,
                    render_value(&a.expected),
                    render_value(&a.actual)
                );
            }
        }
        let _ = writeln!(out, "{}/{} steps passing", self.passed_steps, self.total_steps);
        out
    }
}

fn render_value(v: &Value) -> String {
    match v {
        Value::Null => "unreachable".into(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if !n.is_i64() && !n.is_u64() => format!("{f:.6}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let inner: Vec<String> = items.iter().map(render_value).collect();
            format!("[{}]", inner.join(" "))
        }
        Value::Object(map) => {
            let inner: Vec<String> = map
                .iter()
                .map(|(k, v)| format!("{k}={}", render_value(v)))
                .collect();
            format!("{{{}}}", inner.join(" "))
        }
        Value::Bool(b) => b.to_string(),
    }
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= TIE_EPSILON,
        (None, None) => true,
        _ => false,
    }
}

fn ids_json(ids: &[ResourceId]) -> Value {
    Value::Array(ids.iter().map(|i| Value::String(i.to_string())).collect())
}

fn evaluate(graph: &KnowledgeGraph, action: &Action, now: Timestamp) -> Result<(bool, Value, Value)> {
    match action {
        Action::AssertPaths {
            perspective,
            source,
            target,
            expect_paths,
            expect_length,
        } => {
            let map = build_map(graph, &perspective.resolve()?, now)?;
            let answer = shortest_paths(&map, source.as_str(), target.as_str())?;
            let mut expected_sorted = expect_paths.clone();
            expected_sorted.sort();
            let actual_paths: Vec<Vec<ResourceId>> =
                answer.paths.iter().map(|p| p.nodes.clone()).collect();
            let length_ok = match expect_length {
                Some(len) => close(answer.best_length, Some(*len)),
                None => expect_paths.is_empty() == answer.best_length.is_none(),
            };
            let passed = actual_paths == expected_sorted && length_ok;
            let expected = json!({
                "paths": expected_sorted.iter().map(|p| ids_json(p)).collect::<Vec<_>>(),
                "length": expect_length,
            });
            let actual = json!({
                "paths": actual_paths.iter().map(|p| ids_json(p)).collect::<Vec<_>>(),
                "length": answer.best_length,
            });
            Ok((passed, expected, actual))
        }
        Action::AssertNearest {
            perspective,
            topic,
            kind,
            expect,
        } => {
            let map = build_map(graph, &perspective.resolve()?, now)?;
            let mut passed = true;
            let mut expected = serde_json::Map::new();
            let mut actual = serde_json::Map::new();
            for e in expect {
                let best = nearest_via(&map, e.agent.as_str(), topic.as_str(), Some(*kind), 1)?;
                let got = best.first();
                let ok = got.is_some_and(|r| {
                    r.id == e.document && e.length.is_none_or(|l| close(Some(r.distance), Some(l)))
                });
                passed &= ok;
                expected.insert(
                    e.agent.to_string(),
                    json!({"document": e.document, "length": e.length}),
                );
                actual.insert(
                    e.agent.to_string(),
                    match got {
                        Some(r) => json!({"document": r.id, "length": r.distance}),
                        None => Value::Null,
                    },
                );
            }
            Ok((passed, Value::Object(expected), Value::Object(actual)))
        }
        Action::AssertEquidistant {
            perspective,
            origin,
            targets,
            via,
            expect_length,
        } => {
            let map = build_map(graph, &perspective.resolve()?, now)?;
            let mut lengths = Vec::with_capacity(targets.len());
            for target in targets {
                let d = match via {
                    Some(via) => {
                        map.index_of(target.as_str())?;
                        let route = nearest_via(&map, origin.as_str(), via.as_str(), None, usize::MAX)?;
                        route.into_iter().find(|r| r.id == *target).map(|r| r.distance)
                    }
                    None => crate::query::distance(&map, origin.as_str(), target.as_str())?,
                };
                lengths.push(d);
            }
            let first = lengths.first().copied().flatten();
            let mut passed = first.is_some() && lengths.iter().all(|&d| close(d, first));
            if let Some(len) = expect_length {
                passed &= close(first, Some(*len));
            }
            let expected = json!({"equal": true, "length": expect_length});
            let actual = Value::Object(
                targets
                    .iter()
                    .zip(&lengths)
                    .map(|(t, d)| (t.to_string(), json!(d)))
                    .collect(),
            );
            Ok((passed, expected, actual))
        }
        other => Err(Error::InvalidArgument(format!("`{}` is not an assertion", other.name()))),
    }
}

/// Runs the script against a fresh graph and returns the report together
/// with the final graph.
pub fn execute(script: &ScenarioScript) -> Result<(ScenarioReport, KnowledgeGraph)> {
    let mut graph = KnowledgeGraph::new();
    let mut steps = Vec::with_capacity(script.steps.len());
    for (si, step) in script.steps.iter().enumerate() {
        let number = si + 1;
        let now = Timestamp(number as u64);
        let mut assertions = Vec::new();
        for (ai, action) in step.actions.iter().enumerate() {
            let malformed = |e: Error| Error::MalformedScript {
                step: number,
                action: ai + 1,
                reason: e.to_string(),
            };
            if action.is_assertion() {
                let (passed, expected, actual) = evaluate(&graph, action, now).map_err(malformed)?;
                assertions.push(AssertionOutcome {
                    action: ai + 1,
                    kind: action.name(),
                    passed,
                    expected,
                    actual,
                });
            } else {
                action.apply(&mut graph, now).map_err(malformed)?;
            }
        }
        steps.push(StepReport {
            step: number,
            passed: assertions.iter().all(|a| a.passed),
            assertions,
        });
    }
    let passed_steps = steps.iter().filter(|s| s.passed).count();
    let report = ScenarioReport {
        total_steps: steps.len(),
        passed_steps,
        steps,
    };
    Ok((report, graph))
}

pub fn run_scenario(script: &ScenarioScript) -> Result<ScenarioReport> {
    execute(script).map(|(report, _)| report)
}

/// The graph after running the mutating actions of steps `1..=step`.
pub fn graph_through(script: &ScenarioScript, step: usize) -> Result<KnowledgeGraph> {
    let mut graph = KnowledgeGraph::new();
    for (si, s) in script.steps.iter().take(step).enumerate() {
        for (ai, action) in s.actions.iter().enumerate() {
            if !action.is_assertion() {
                action
                    .apply(&mut graph, Timestamp(si as u64 + 1))
                    .map_err(|e| Error::MalformedScript {
                        step: si + 1,
                        action: ai + 1,
                        reason: e.to_string(),
                    })?;
            }
        }
    }
    Ok(graph)
}
