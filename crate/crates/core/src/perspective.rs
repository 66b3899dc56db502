//! Consumer-side interpretation of the shared trace.
//!
//! A [`Perspective`] scores every viewpoint (paradigm weight, emitter trust,
//! recency decay, exclusions) and sums each beam into a proximity. The result
//! of applying one perspective to one graph snapshot at one instant is a
//! [`KnowledgeMap`], where an edge's distance is the reciprocal of its strength.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, Pair, Paradigm, ResourceId, ResourceKind, Timestamp, Viewpoint};

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParadigmWeights {
    #[serde(default = "one")]
    pub logic: f64,
    #[serde(default = "one")]
    pub mine: f64,
    #[serde(default = "one")]
    pub feel: f64,
}

impl Default for ParadigmWeights {
    fn default() -> Self {
        Self {
            logic: 1.0,
            mine: 1.0,
            feel: 1.0,
        }
    }
}

impl ParadigmWeights {
    pub fn get(&self, paradigm: Paradigm) -> f64 {
        match paradigm {
            Paradigm::Logic => self.logic,
            Paradigm::Mine => self.mine,
            Paradigm::Feel => self.feel,
        }
    }

    pub fn set(&mut self, paradigm: Paradigm, weight: f64) {
        match paradigm {
            Paradigm::Logic => self.logic = weight,
            Paradigm::Mine => self.mine = weight,
            Paradigm::Feel => self.feel = weight,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trust {
    #[serde(default = "one")]
    pub default: f64,
    #[serde(default)]
    pub per_agent: BTreeMap<ResourceId, f64>,
}

impl Default for Trust {
    fn default() -> Self {
        Self {
            default: 1.0,
            per_agent: BTreeMap::new(),
        }
    }
}

impl Trust {
    pub fn of(&self, agent: &ResourceId) -> f64 {
        self.per_agent.get(agent).copied().unwrap_or(self.default)
    }
}

/// Rules for evaluating viewpoints and aggregating beams.
///
/// The JSON form uses the field names below; absent keys take their defaults,
/// and `half_life: null` means no decay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perspective {
    #[serde(default)]
    pub paradigm_weights: ParadigmWeights,
    #[serde(default)]
    pub trust: Trust,
    #[serde(default)]
    pub half_life: Option<f64>,
    #[serde(default)]
    pub exclude_emitters: BTreeSet<ResourceId>,
    #[serde(default = "yes")]
    pub clamp_negative: bool,
}

impl Default for Perspective {
    fn default() -> Self {
        Self {
            paradigm_weights: ParadigmWeights::default(),
            trust: Trust::default(),
            half_life: None,
            exclude_emitters: BTreeSet::new(),
            clamp_negative: true,
        }
    }
}

impl Perspective {
    /// All weights and trust 1, no decay, no exclusions.
    pub fn neutral() -> Self {
        Self::default()
    }

    /// Resolves a preset name (`neutral`) or an inline JSON object.
    pub fn resolve(input: &str) -> Result<Self> {
        let trimmed = input.trim();
        if trimmed.starts_with('{') {
            return Self::from_json(trimmed);
        }
        match trimmed {
            "neutral" => Ok(Self::neutral()),
            other => Err(Error::InvalidPerspective(format!("unknown preset `{other}`"))),
        }
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let p: Perspective =
            serde_json::from_str(json).map_err(|e| Error::InvalidPerspective(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    /// Canonical JSON with every key present.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("perspective serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidPerspective(what));
        for paradigm in Paradigm::ALL {
            let w = self.paradigm_weights.get(paradigm);
            if !(w.is_finite() && w >= 0.0) {
                return bad(format!("paradigm weight {paradigm:?} = {w}"));
            }
        }
        if !(self.trust.default.is_finite() && self.trust.default >= 0.0) {
            return bad(format!("default trust = {}", self.trust.default));
        }
        for (agent, t) in &self.trust.per_agent {
            if !(t.is_finite() && *t >= 0.0) {
                return bad(format!("trust of {agent} = {t}"));
            }
        }
        if let Some(h) = self.half_life {
            if h.is_nan() || h <= 0.0 {
                return bad(format!("half_life = {h}"));
            }
        }
        Ok(())
    }

    /// Same perspective, additionally discarding viewpoints emitted by `agent`.
    pub fn excluding(mut self, agent: ResourceId) -> Self {
        self.exclude_emitters.insert(agent);
        self
    }

    pub fn with_half_life(mut self, half_life: f64) -> Self {
        self.half_life = Some(half_life);
        self
    }

    pub fn with_paradigm_weight(mut self, paradigm: Paradigm, weight: f64) -> Self {
        self.paradigm_weights.set(paradigm, weight);
        self
    }

    pub fn with_trust(mut self, agent: ResourceId, trust: f64) -> Self {
        self.trust.per_agent.insert(agent, trust);
        self
    }
}

/// Either a named preset or an inline perspective, as carried by requests
/// and scripts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerspectiveSpec {
    Preset(String),
    Inline(Perspective),
}

impl Default for PerspectiveSpec {
    fn default() -> Self {
        PerspectiveSpec::Preset("neutral".into())
    }
}

impl PerspectiveSpec {
    pub fn resolve(&self) -> Result<Perspective> {
        match self {
            PerspectiveSpec::Preset(name) => Perspective::resolve(name),
            PerspectiveSpec::Inline(p) => {
                p.validate()?;
                Ok(p.clone())
            }
        }
    }
}

/// Signed value of one viewpoint under `p` at time `now`.
pub fn evaluate_viewpoint(vp: &Viewpoint, p: &Perspective, now: Timestamp) -> Result<f64> {
    if now < vp.at {
        return Err(Error::TimeTravel {
            now: now.0,
            at: vp.at.0,
        });
    }
    if p.exclude_emitters.contains(&vp.emitter) {
        return Ok(0.0);
    }
    let decay = match p.half_life {
        Some(half_life) => (-((now.0 - vp.at.0) as f64) / half_life).exp2(),
        None => 1.0,
    };
    Ok(vp.vtype.polarity.sign()
        * p.paradigm_weights.get(vp.vtype.paradigm)
        * p.trust.of(&vp.emitter)
        * decay)
}

/// Aggregated proximity of a beam: the (optionally clamped) sum of its
/// evaluations. Empty beams have strength 0.
pub fn beam_strength<'a>(
    beam: impl IntoIterator<Item = &'a Viewpoint>,
    p: &Perspective,
    now: Timestamp,
) -> Result<f64> {
    let mut pair: Option<&Pair> = None;
    let mut sum = 0.0;
    for vp in beam {
        match pair {
            Some(existing) if *existing != vp.pair => return Err(Error::MixedBeam),
            Some(_) => {}
            None => pair = Some(&vp.pair),
        }
        sum += evaluate_viewpoint(vp, p, now)?;
    }
    Ok(if p.clamp_negative { sum.max(0.0) } else { sum })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapEdge {
    pub strength: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapNode {
    pub kind: ResourceKind,
    pub label: String,
}

/// Weighted graph derived from one (snapshot, perspective, now) triple.
///
/// Holds every registered resource so queries can tell unknown ids from
/// unreachable ones; only pairs with positive strength become edges.
#[derive(Clone, Debug)]
pub struct KnowledgeMap {
    source_version: u64,
    perspective: Perspective,
    now: Timestamp,
    ids: Vec<ResourceId>,
    nodes: Vec<MapNode>,
    index: HashMap<ResourceId, usize>,
    edges: BTreeMap<Pair, MapEdge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl KnowledgeMap {
    pub fn source_version(&self) -> u64 {
        self.source_version
    }

    pub fn perspective(&self) -> &Perspective {
        &self.perspective
    }

    pub fn now(&self) -> Timestamp {
        self.now
    }

    /// True when `graph` has moved past the snapshot this map was built from.
    pub fn is_stale(&self, graph: &KnowledgeGraph) -> bool {
        graph.version() != self.source_version
    }

    pub fn edges(&self) -> &BTreeMap<Pair, MapEdge> {
        &self.edges
    }

    pub fn edge(&self, a: &str, b: &str) -> Option<MapEdge> {
        let pair = Pair::new(ResourceId::new(a).ok()?, ResourceId::new(b).ok()?)?;
        self.edges.get(&pair).copied()
    }

    pub fn strength(&self, a: &str, b: &str) -> f64 {
        self.edge(a, b).map_or(0.0, |e| e.strength)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn node(&self, id: &str) -> Option<&MapNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    /// Registered resources in ascending id order.
    pub fn resource_ids(&self) -> &[ResourceId] {
        &self.ids
    }

    /// Resources incident to at least one edge, ascending.
    pub fn connected_ids(&self) -> Vec<&ResourceId> {
        self.ids
            .iter()
            .zip(&self.adjacency)
            .filter(|(_, adj)| !adj.is_empty())
            .map(|(id, _)| id)
            .collect()
    }

    pub(crate) fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownResource(id.to_owned()))
    }

    pub(crate) fn id_at(&self, index: usize) -> &ResourceId {
        &self.ids[index]
    }

    pub(crate) fn kind_at(&self, index: usize) -> ResourceKind {
        self.nodes[index].kind
    }

    pub(crate) fn adjacency(&self) -> &[Vec<(usize, f64)>] {
        &self.adjacency
    }
}

/// Applies `p` to every beam of `graph` as of `now`.
pub fn build_map(graph: &KnowledgeGraph, p: &Perspective, now: Timestamp) -> Result<KnowledgeMap> {
    p.validate()?;
    if now < graph.max_timestamp() {
        if let Some(vp) = graph.viewpoints().iter().find(|vp| vp.at > now) {
            return Err(Error::TimeTravel {
                now: now.0,
                at: vp.at.0,
            });
        }
    }

    // Sums run in append order per pair, so results are bit-reproducible.
    let mut sums: BTreeMap<Pair, f64> = BTreeMap::new();
    for vp in graph.viewpoints() {
        let value = evaluate_viewpoint(vp, p, now)?;
        *sums.entry(vp.pair.clone()).or_insert(0.0) += value;
    }

    let mut ids: Vec<ResourceId> = graph.resources().iter().map(|r| r.id.clone()).collect();
    ids.sort();
    let index: HashMap<ResourceId, usize> =
        ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
    let nodes = ids
        .iter()
        .map(|id| {
            let r = graph.resource(id.as_str()).expect("registered");
            MapNode {
                kind: r.kind,
                label: r.label.clone(),
            }
        })
        .collect();

    let mut edges = BTreeMap::new();
    let mut adjacency = vec![Vec::new(); ids.len()];
    for (pair, sum) in sums {
        let strength = if p.clamp_negative { sum.max(0.0) } else { sum };
        if strength > 0.0 {
            let distance = 1.0 / strength;
            let a = index[pair.lo()];
            let b = index[pair.hi()];
            adjacency[a].push((b, distance));
            adjacency[b].push((a, distance));
            edges.insert(pair, MapEdge { strength, distance });
        }
    }

    Ok(KnowledgeMap {
        source_version: graph.version(),
        perspective: p.clone(),
        now,
        ids,
        nodes,
        index,
        edges,
        adjacency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Agency, NewResource, ViewpointType};

    fn vp_graph() -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        g.add_resource(NewResource::agent("B", Agency::Human)).unwrap();
        g.add_resource(NewResource::agent("miner", Agency::Artificial))
            .unwrap();
        g.add_resource(NewResource::document("D1")).unwrap();
        g.add_resource(NewResource::topic("apple")).unwrap();
        g
    }

    #[test]
    fn neutral_evaluation_is_identity() {
        let mut g = vp_graph();
        g.add_viewpoint("miner", "D1", "apple", ViewpointType::positive(Paradigm::Mine), Timestamp(1))
            .unwrap();
        let v = evaluate_viewpoint(&g.viewpoints()[0], &Perspective::neutral(), Timestamp(1)).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn half_life_halves() {
        let mut g = vp_graph();
        g.add_viewpoint("B", "D1", "apple", ViewpointType::positive(Paradigm::Feel), Timestamp(5))
            .unwrap();
        let p = Perspective::neutral().with_half_life(10.0);
        let v = evaluate_viewpoint(&g.viewpoints()[0], &p, Timestamp(15)).unwrap();
        assert_eq!(v, 0.5);
        assert!(matches!(
            evaluate_viewpoint(&g.viewpoints()[0], &p, Timestamp(4)),
            Err(Error::TimeTravel { .. })
        ));
    }

    #[test]
    fn excluded_emitters_count_zero() {
        let mut g = vp_graph();
        g.add_viewpoint("B", "B", "D1", ViewpointType::positive(Paradigm::Feel), Timestamp(1))
            .unwrap();
        let p = Perspective::neutral().excluding(ResourceId::new("B").unwrap());
        assert_eq!(evaluate_viewpoint(&g.viewpoints()[0], &p, Timestamp(1)).unwrap(), 0.0);
    }

    #[test]
    fn beam_strength_clamps_and_rejects_mixed() {
        let mut g = vp_graph();
        g.add_viewpoint("miner", "D1", "apple", ViewpointType::positive(Paradigm::Mine), Timestamp(1))
            .unwrap();
        g.add_viewpoint("B", "D1", "apple", ViewpointType::negative(Paradigm::Feel), Timestamp(1))
            .unwrap();
        g.add_viewpoint("B", "D1", "apple", ViewpointType::negative(Paradigm::Feel), Timestamp(1))
            .unwrap();
        let neutral = Perspective::neutral();
        let beam = g.beam("D1", "apple").unwrap();
        assert_eq!(beam_strength(beam.iter().copied().take(2), &neutral, Timestamp(1)).unwrap(), 0.0);
        assert_eq!(beam_strength(beam.iter().copied(), &neutral, Timestamp(1)).unwrap(), 0.0);
        let unclamped = Perspective {
            clamp_negative: false,
            ..Perspective::neutral()
        };
        assert_eq!(beam_strength(beam.iter().copied(), &unclamped, Timestamp(1)).unwrap(), -1.0);
        assert_eq!(beam_strength(std::iter::empty(), &neutral, Timestamp(1)).unwrap(), 0.0);

        g.add_viewpoint("B", "B", "D1", ViewpointType::positive(Paradigm::Feel), Timestamp(1))
            .unwrap();
        let mixed = [&g.viewpoints()[0], &g.viewpoints()[3]];
        assert!(matches!(
            beam_strength(mixed, &neutral, Timestamp(1)),
            Err(Error::MixedBeam)
        ));
    }

    #[test]
    fn json_defaults_and_validation() {
        let p = Perspective::from_json("{}").unwrap();
        assert_eq!(p, Perspective::neutral());
        let p = Perspective::from_json(r#"{"paradigm_weights":{"feel":2},"half_life":null}"#).unwrap();
        assert_eq!(p.paradigm_weights.get(Paradigm::Feel), 2.0);
        assert_eq!(p.paradigm_weights.get(Paradigm::Logic), 1.0);
        assert!(Perspective::from_json(r#"{"half_life":0}"#).is_err());
        assert!(Perspective::from_json(r#"{"trust":{"default":-1}}"#).is_err());
        assert!(Perspective::from_json(r#"{"weights":{}}"#).is_err());
        assert!(Perspective::resolve("nonsense").is_err());
        assert_eq!(
            Perspective::neutral().to_json(),
            r#"{"paradigm_weights":{"logic":1.0,"mine":1.0,"feel":1.0},"trust":{"default":1.0,"per_agent":{}},"half_life":null,"exclude_emitters":[],"clamp_negative":true}"#
        );
        let round = Perspective::from_json(&Perspective::neutral().excluding(ResourceId::new("B").unwrap()).to_json()).unwrap();
        assert!(round.exclude_emitters.contains("B"));
    }

    #[test]
    fn map_records_provenance() {
        let mut g = vp_graph();
        g.add_viewpoint("miner", "D1", "apple", ViewpointType::positive(Paradigm::Mine), Timestamp(1))
            .unwrap();
        let map = build_map(&g, &Perspective::neutral(), Timestamp(1)).unwrap();
        assert_eq!(map.source_version(), 5);
        assert!(!map.is_stale(&g));
        assert_eq!(map.edges().len(), 1);
        assert_eq!(map.edge("apple", "D1").unwrap().distance, 1.0);
        assert!(matches!(
            build_map(&g, &Perspective::neutral(), Timestamp(0)),
            Err(Error::TimeTravel { .. })
        ));
        g.add_viewpoint("B", "B", "D1", ViewpointType::positive(Paradigm::Feel), Timestamp(2))
            .unwrap();
        assert!(map.is_stale(&g));
    }
}
