//! Multi-agent exploitation/feedback simulation.
//!
//! Each round, every agent (in a seeded order) picks a topic, looks at the
//! knowledge map through its perspective, visits one document it has not
//! visited yet, and reacts according to its private affinity for it.
//!
//! # Randomness
//!
//! Every draw comes from a ChaCha8 stream whose 32-byte key is
//! `seed ‖ round ‖ slot ‖ 0` (each a little-endian `u64`), where `slot` is the
//! agent's population index, or `u64::MAX` for the round's turn order. Words
//! are taken with `next_u64`; a value below `n` is `(word * n) >> 64`, a unit
//! real is `(word >> 11) / 2^53`. The turn order is a Fisher-Yates shuffle
//! drawing `below(i + 1)` for `i` from `n - 1` down to `1`. Per agent, the
//! draws are, in order: the exclude-self coin, the topic index, and (for
//! explorers) the document index.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, Polarity, ResourceId, ResourceKind, Timestamp};
use crate::perspective::{build_map, Perspective};
use crate::query::nearest_via;
use crate::session::{record_feedback, Action, FeedbackEvent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Visits the unvisited document on the shortest route to the topic.
    ShortestPathFirst,
    /// Visits a uniformly drawn unvisited document.
    Explorer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentProfile {
    pub agent: ResourceId,
    /// The agent's private valuation of documents, in `[-1, 1]`; absent means 0.
    #[serde(default)]
    pub affinity: BTreeMap<ResourceId, f64>,
    pub strategy: Strategy,
    #[serde(default)]
    pub exclude_self_prob: f64,
}

fn default_threshold() -> f64 {
    0.3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub seed: u64,
    pub rounds: u64,
    pub population: Vec<AgentProfile>,
    pub topics: Vec<ResourceId>,
    #[serde(default = "default_threshold")]
    pub like_threshold: f64,
    /// Graph actions applied at tick 0 before the first round.
    #[serde(default)]
    pub setup: Vec<Action>,
}

const DEFAULT_CONFIG: &str = include_str!("../data/default_simulation.json");
const APPLE_CONFIG: &str = include_str!("../data/apple_simulation.json");

impl SimulationConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let config: SimulationConfig =
            serde_json::from_str(json).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Shipped default experiment.
    pub fn default_experiment() -> Self {
        Self::from_json(DEFAULT_CONFIG).expect("built-in config parses")
    }

    /// Population mimicking the three learners of the apple scenario.
    pub fn apple_learners() -> Self {
        Self::from_json(APPLE_CONFIG).expect("built-in config parses")
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidArgument(m));
        if self.topics.is_empty() {
            return invalid("at least one topic is required".into());
        }
        if !(0.0..=1.0).contains(&self.like_threshold) {
            return invalid(format!("like_threshold {} outside [0, 1]", self.like_threshold));
        }
        for profile in &self.population {
            if !(0.0..=1.0).contains(&profile.exclude_self_prob) {
                return invalid(format!("exclude_self_prob of {} outside [0, 1]", profile.agent));
            }
            if let Some((doc, a)) = profile.affinity.iter().find(|(_, a)| !(-1.0..=1.0).contains(*a)) {
                return invalid(format!("affinity of {} for {doc} = {a} outside [-1, 1]", profile.agent));
            }
        }
        if self.setup.iter().any(Action::is_assertion) {
            return invalid("setup may not contain assertions".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: u64,
    pub synchronization: f64,
    pub viewpoints_appended: usize,
}

const ORDER_SLOT: u64 = u64::MAX;

struct Draws(ChaCha8Rng);

impl Draws {
    fn new(seed: u64, round: u64, slot: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&round.to_le_bytes());
        key[16..24].copy_from_slice(&slot.to_le_bytes());
        Self(ChaCha8Rng::from_seed(key))
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.0.next_u64() as u128 * n as u128) >> 64) as usize
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// A running simulation: the graph plus each agent's visit history.
#[derive(Clone, Debug)]
pub struct Simulation {
    config: SimulationConfig,
    graph: KnowledgeGraph,
    visited: Vec<BTreeSet<ResourceId>>,
    round: u64,
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let mut graph = KnowledgeGraph::new();
        for action in &config.setup {
            action.apply(&mut graph, Timestamp(0))?;
        }
        for profile in &config.population {
            expect_kind(&graph, &profile.agent, ResourceKind::Agent)?;
        }
        for topic in &config.topics {
            expect_kind(&graph, topic, ResourceKind::Topic)?;
        }
        let visited = vec![BTreeSet::new(); config.population.len()];
        Ok(Self {
            config,
            graph,
            visited,
            round: 0,
        })
    }

    pub fn graph(&self) -> &KnowledgeGraph {
        &self.graph
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    /// Rounds completed so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    /// Documents the `index`-th population member has visited so far.
    pub fn visited(&self, index: usize) -> &BTreeSet<ResourceId> {
        &self.visited[index]
    }

    pub fn agents(&self) -> Vec<ResourceId> {
        self.config.population.iter().map(|p| p.agent.clone()).collect()
    }

    /// Plays the next round at tick `round` and returns the feedback applied.
    pub fn run_round(&mut self) -> Result<Vec<FeedbackEvent>> {
        let round = self.round + 1;
        let now = Timestamp(round);
        let seed = self.config.seed;
        let n = self.config.population.len();

        let mut order: Vec<usize> = (0..n).collect();
        let mut shuffle = Draws::new(seed, round, ORDER_SLOT);
        for i in (1..n).rev() {
            let j = shuffle.below(i + 1);
            order.swap(i, j);
        }

        let mut applied = Vec::new();
        for index in order {
            let profile = &self.config.population[index];
            let mut draws = Draws::new(seed, round, index as u64);
            let exclude_self = draws.unit() < profile.exclude_self_prob;
            let topic = self.config.topics[draws.below(self.config.topics.len())].clone();

            let visited = &self.visited[index];
            let choice = match profile.strategy {
                Strategy::ShortestPathFirst => {
                    let mut perspective = Perspective::neutral();
                    if exclude_self {
                        perspective = perspective.excluding(profile.agent.clone());
                    }
                    let map = build_map(&self.graph, &perspective, now)?;
                    nearest_via(
                        &map,
                        profile.agent.as_str(),
                        topic.as_str(),
                        Some(ResourceKind::Document),
                        usize::MAX,
                    )?
                    .into_iter()
                    .map(|r| r.id)
                    .find(|id| !visited.contains(id))
                }
                Strategy::Explorer => {
                    let mut unvisited: Vec<&ResourceId> = self
                        .graph
                        .resources()
                        .iter()
                        .filter(|r| r.kind == ResourceKind::Document && !visited.contains(&r.id))
                        .map(|r| &r.id)
                        .collect();
                    unvisited.sort();
                    (!unvisited.is_empty()).then(|| unvisited[draws.below(unvisited.len())].clone())
                }
            };
            let Some(document) = choice else { continue };

            let affinity = profile.affinity.get(&document).copied().unwrap_or(0.0);
            let agent = profile.agent.clone();
            self.visited[index].insert(document.clone());
            if affinity.abs() >= self.config.like_threshold && affinity != 0.0 {
                let event = FeedbackEvent {
                    agent,
                    document,
                    topic: Some(topic),
                    polarity: if affinity > 0.0 {
                        Polarity::Positive
                    } else {
                        Polarity::Negative
                    },
                    at: now,
                };
                record_feedback(&mut self.graph, &event)?;
                applied.push(event);
            }
        }
        self.round = round;
        Ok(applied)
    }

    /// Mean synchronization over the configured topics, neutral perspective.
    pub fn synchronization(&self) -> Result<f64> {
        let agents = self.agents();
        let mut total = 0.0;
        for topic in &self.config.topics {
            total += synchronization(&self.graph, &Perspective::neutral(), topic.as_str(), &agents)?;
        }
        Ok(total / self.config.topics.len() as f64)
    }
}

fn expect_kind(graph: &KnowledgeGraph, id: &ResourceId, kind: ResourceKind) -> Result<()> {
    let r = graph.require(id.as_str())?;
    if r.kind != kind {
        return Err(Error::KindMismatch {
            resource: id.to_string(),
            expected: kind.name(),
            actual: r.kind.name(),
        });
    }
    Ok(())
}

/// Fraction of unordered agent pairs whose best document for `topic`
/// coincides. An agent with no reachable document only agrees with another
/// such agent; fewer than two agents count as full agreement.
pub fn synchronization(
    graph: &KnowledgeGraph,
    perspective: &Perspective,
    topic: &str,
    population: &[ResourceId],
) -> Result<f64> {
    graph.require(topic)?;
    let map = build_map(graph, perspective, graph.max_timestamp())?;
    let mut choices = Vec::with_capacity(population.len());
    for agent in population {
        let best = nearest_via(&map, agent.as_str(), topic, Some(ResourceKind::Document), 1)?;
        choices.push(best.into_iter().next().map(|r| r.id));
    }
    let mut pairs = 0usize;
    let mut agreeing = 0usize;
    for i in 0..choices.len() {
        for j in i + 1..choices.len() {
            pairs += 1;
            if choices[i] == choices[j] {
                agreeing += 1;
            }
        }
    }
    Ok(if pairs == 0 {
        1.0
    } else {
        agreeing as f64 / pairs as f64
    })
}

/// Outcome of a full run.
#[derive(Clone, Debug)]
pub struct SimulationRun {
    pub metrics: Vec<RoundMetrics>,
    pub events: Vec<FeedbackEvent>,
    pub graph: KnowledgeGraph,
}

impl SimulationRun {
    /// One JSON object per round.
    pub fn write_metrics(&self, mut out: impl Write) -> Result<()> {
        for m in &self.metrics {
            writeln!(out, "{}", serde_json::to_string(m).expect("metrics serialize"))?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn run(config: SimulationConfig) -> Result<SimulationRun> {
    let rounds = config.rounds;
    let mut sim = Simulation::new(config)?;
    let mut metrics = Vec::with_capacity(rounds as usize);
    let mut events = Vec::new();
    for _ in 0..rounds {
        let before = sim.graph().viewpoint_count();
        let applied = sim.run_round()?;
        events.extend(applied);
        metrics.push(RoundMetrics {
            round: sim.round(),
            synchronization: sim.synchronization()?,
            viewpoints_appended: sim.graph().viewpoint_count() - before,
        });
    }
    Ok(SimulationRun {
        metrics,
        events,
        graph: sim.graph,
    })
}
