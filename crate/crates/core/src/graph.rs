//! Domain types and the append-only knowledge graph.
//!
//! A [`KnowledgeGraph`] stores knowledge resources (agents, documents, topics)
//! and the viewpoints agents emit about pairs of them. Nothing is ever edited
//! or removed; disagreement is a new viewpoint with negative polarity.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Opaque, non-empty resource identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ResourceId(String);

impl ResourceId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidArgument("resource id must be non-empty".into()));
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl<'de> Deserialize<'de> for ResourceId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        ResourceId::new(raw).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for ResourceId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Abstract time tick: epoch seconds in a live store, step index in scenarios.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Agent,
    Document,
    Topic,
}

impl ResourceKind {
    pub fn name(self) -> &'static str {
        match self {
            ResourceKind::Agent => "agent",
            ResourceKind::Document => "document",
            ResourceKind::Topic => "topic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agency {
    Human,
    Artificial,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resource {
    pub id: ResourceId,
    pub kind: ResourceKind,
    pub agency: Option<Agency>,
    pub label: String,
    pub created_at: Timestamp,
}

/// Which paradigm a viewpoint comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Paradigm {
    Logic,
    Mine,
    Feel,
}

impl Paradigm {
    pub const ALL: [Paradigm; 3] = [Paradigm::Logic, Paradigm::Mine, Paradigm::Feel];
}

/// Serialized as the integers `1` and `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }
}

impl Serialize for Polarity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.sign() as i8)
    }
}

impl<'de> Deserialize<'de> for Polarity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match i64::deserialize(deserializer)? {
            1 => Ok(Polarity::Positive),
            -1 => Ok(Polarity::Negative),
            other => Err(serde::de::Error::custom(format!(
                "polarity must be 1 or -1, got {other}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ViewpointType {
    pub paradigm: Paradigm,
    pub polarity: Polarity,
}

impl ViewpointType {
    pub fn new(paradigm: Paradigm, polarity: Polarity) -> Self {
        Self { paradigm, polarity }
    }

    pub fn positive(paradigm: Paradigm) -> Self {
        Self::new(paradigm, Polarity::Positive)
    }

    pub fn negative(paradigm: Paradigm) -> Self {
        Self::new(paradigm, Polarity::Negative)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ViewpointId(String);

impl ViewpointId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ViewpointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Unordered pair of distinct resources, stored in ascending id order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    lo: ResourceId,
    hi: ResourceId,
}

impl Pair {
    /// `None` when both ends are the same resource.
    pub fn new(a: ResourceId, b: ResourceId) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Self { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Some(Self { lo: b, hi: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn lo(&self) -> &ResourceId {
        &self.lo
    }

    pub fn hi(&self) -> &ResourceId {
        &self.hi
    }

    pub fn contains(&self, id: &str) -> bool {
        self.lo.as_str() == id || self.hi.as_str() == id
    }

    /// The other end of the pair, if `id` is one of its ends.
    pub fn other(&self, id: &str) -> Option<&ResourceId> {
        if self.lo.as_str() == id {
            Some(&self.hi)
        } else if self.hi.as_str() == id {
            Some(&self.lo)
        } else {
            None
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}--{}", self.lo, self.hi)
    }
}

/// Agent `emitter` believes at time `at` that the two resources of `pair`
/// are related, in the way carried by `vtype`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Viewpoint {
    pub id: ViewpointId,
    pub emitter: ResourceId,
    pub pair: Pair,
    pub vtype: ViewpointType,
    pub at: Timestamp,
}

/// Description of a resource to register.
#[derive(Clone, Debug)]
pub struct NewResource {
    pub id: Option<String>,
    pub kind: ResourceKind,
    pub agency: Option<Agency>,
    pub label: Option<String>,
    pub at: Timestamp,
}

impl NewResource {
    pub fn new(kind: ResourceKind) -> Self {
        Self {
            id: None,
            kind,
            agency: None,
            label: None,
            at: Timestamp(0),
        }
    }

    pub fn agent(id: &str, agency: Agency) -> Self {
        Self::new(ResourceKind::Agent).id(id).agency(agency)
    }

    pub fn document(id: &str) -> Self {
        Self::new(ResourceKind::Document).id(id)
    }

    pub fn topic(id: &str) -> Self {
        Self::new(ResourceKind::Topic).id(id)
    }

    pub fn id(mut self, id: &str) -> Self {
        self.id = Some(id.to_owned());
        self
    }

    pub fn agency(mut self, agency: Agency) -> Self {
        self.agency = Some(agency);
        self
    }

    pub fn label(mut self, label: &str) -> Self {
        self.label = Some(label.to_owned());
        self
    }

    pub fn at(mut self, at: Timestamp) -> Self {
        self.at = at;
        self
    }
}

/// One entry of the global append order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entry {
    Resource(usize),
    Viewpoint(usize),
}

/// The shared, append-only trace of resources and viewpoints.
///
/// `version` counts appends of either kind, so it always equals
/// `resource_count() + viewpoint_count()`.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeGraph {
    resources: Vec<Resource>,
    by_id: HashMap<ResourceId, usize>,
    viewpoints: Vec<Viewpoint>,
    viewpoint_ids: HashSet<ViewpointId>,
    beams: HashMap<Pair, Vec<usize>>,
    entries: Vec<Entry>,
    last_emitted: HashMap<ResourceId, Timestamp>,
    max_timestamp: Timestamp,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn version(&self) -> u64 {
        self.entries.len() as u64
    }

    pub fn resource_count(&self) -> usize {
        self.resources.len()
    }

    pub fn viewpoint_count(&self) -> usize {
        self.viewpoints.len()
    }

    /// Latest timestamp seen on any resource or viewpoint, `0` when empty.
    pub fn max_timestamp(&self) -> Timestamp {
        self.max_timestamp
    }

    pub fn resource(&self, id: &str) -> Option<&Resource> {
        self.by_id.get(id).map(|&i| &self.resources[i])
    }

    /// Looks up a resource, failing with `UnknownResource`.
    pub fn require(&self, id: &str) -> Result<&Resource> {
        self.resource(id)
            .ok_or_else(|| Error::UnknownResource(id.to_owned()))
    }

    /// Resources in registration order.
    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    /// Viewpoints in append order.
    pub fn viewpoints(&self) -> &[Viewpoint] {
        &self.viewpoints
    }

    /// Resources and viewpoints interleaved in global append order.
    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn add_resource(&mut self, new: NewResource) -> Result<ResourceId> {
        let id = match new.id {
            Some(id) => {
                let id = ResourceId::new(id)?;
                if self.by_id.contains_key(&id) {
                    return Err(Error::DuplicateId(id.0));
                }
                id
            }
            None => self.fresh_resource_id(),
        };
        if (new.kind == ResourceKind::Agent) != new.agency.is_some() {
            return Err(Error::AgencyMismatch(id.0));
        }
        let label = new.label.unwrap_or_else(|| id.0.clone());
        self.push_resource(Resource {
            id: id.clone(),
            kind: new.kind,
            agency: new.agency,
            label,
            created_at: new.at,
        });
        Ok(id)
    }

    /// Registers a fully-formed resource, as read back from a log.
    pub fn insert_resource(&mut self, resource: Resource) -> Result<()> {
        if self.by_id.contains_key(&resource.id) {
            return Err(Error::DuplicateId(resource.id.0));
        }
        if (resource.kind == ResourceKind::Agent) != resource.agency.is_some() {
            return Err(Error::AgencyMismatch(resource.id.0));
        }
        self.push_resource(resource);
        Ok(())
    }

    fn push_resource(&mut self, resource: Resource) {
        self.max_timestamp = self.max_timestamp.max(resource.created_at);
        self.by_id.insert(resource.id.clone(), self.resources.len());
        self.entries.push(Entry::Resource(self.resources.len()));
        self.resources.push(resource);
    }

    fn fresh_resource_id(&self) -> ResourceId {
        let mut n = self.version() + 1;
        loop {
            let candidate = ResourceId(format!("res-{n}"));
            if !self.by_id.contains_key(&candidate) {
                return candidate;
            }
            n += 1;
        }
    }

    pub fn add_viewpoint(
        &mut self,
        emitter: &str,
        r2: &str,
        r3: &str,
        vtype: ViewpointType,
        at: Timestamp,
    ) -> Result<ViewpointId> {
        let mut n = self.viewpoints.len() + 1;
        let id = loop {
            let candidate = ViewpointId(format!("vp-{n}"));
            if !self.viewpoint_ids.contains(&candidate) {
                break candidate;
            }
            n += 1;
        };
        let pair = self.check_viewpoint(emitter, r2, r3, at)?;
        let emitter = self.require(emitter)?.id.clone();
        self.push_viewpoint(Viewpoint {
            id: id.clone(),
            emitter,
            pair,
            vtype,
            at,
        });
        Ok(id)
    }

    /// Appends a fully-formed viewpoint, as read back from a log.
    pub fn insert_viewpoint(&mut self, viewpoint: Viewpoint) -> Result<()> {
        if self.viewpoint_ids.contains(&viewpoint.id) {
            return Err(Error::DuplicateId(viewpoint.id.0));
        }
        self.check_viewpoint(
            viewpoint.emitter.as_str(),
            viewpoint.pair.lo.as_str(),
            viewpoint.pair.hi.as_str(),
            viewpoint.at,
        )?;
        self.push_viewpoint(viewpoint);
        Ok(())
    }

    fn check_viewpoint(&self, emitter: &str, r2: &str, r3: &str, at: Timestamp) -> Result<Pair> {
        let source = self.require(emitter)?;
        let a = self.require(r2)?.id.clone();
        let b = self.require(r3)?.id.clone();
        if source.kind != ResourceKind::Agent {
            return Err(Error::NonAgentEmitter(emitter.to_owned()));
        }
        let pair = Pair::new(a, b).ok_or_else(|| Error::SelfLoop(r2.to_owned()))?;
        if let Some(&last) = self.last_emitted.get(emitter) {
            if at < last {
                return Err(Error::TimeRegression {
                    emitter: emitter.to_owned(),
                    at: at.0,
                    last: last.0,
                });
            }
        }
        Ok(pair)
    }

    fn push_viewpoint(&mut self, viewpoint: Viewpoint) {
        let index = self.viewpoints.len();
        self.max_timestamp = self.max_timestamp.max(viewpoint.at);
        self.last_emitted
            .insert(viewpoint.emitter.clone(), viewpoint.at);
        self.beams
            .entry(viewpoint.pair.clone())
            .or_default()
            .push(index);
        self.viewpoint_ids.insert(viewpoint.id.clone());
        self.entries.push(Entry::Viewpoint(index));
        self.viewpoints.push(viewpoint);
    }

    /// Every viewpoint linking `r1` and `r2`, in append order.
    pub fn beam(&self, r1: &str, r2: &str) -> Result<Vec<&Viewpoint>> {
        let a = self.require(r1)?.id.clone();
        let b = self.require(r2)?.id.clone();
        let pair = Pair::new(a, b).ok_or_else(|| Error::SelfLoop(r1.to_owned()))?;
        Ok(self
            .beams
            .get(&pair)
            .map(|indices| indices.iter().map(|&i| &self.viewpoints[i]).collect())
            .unwrap_or_default())
    }

    /// Pairs carrying at least one viewpoint (unordered iteration).
    pub fn beam_pairs(&self) -> impl Iterator<Item = &Pair> {
        self.beams.keys()
    }

    /// A new graph holding every resource and only the viewpoints accepted by
    /// `keep`, in the same relative order. Versions are renumbered.
    pub fn filtered(&self, mut keep: impl FnMut(&Viewpoint) -> bool) -> KnowledgeGraph {
        let mut out = KnowledgeGraph::new();
        for entry in &self.entries {
            match *entry {
                Entry::Resource(i) => out.push_resource(self.resources[i].clone()),
                Entry::Viewpoint(i) => {
                    let vp = &self.viewpoints[i];
                    if keep(vp) {
                        out.push_viewpoint(vp.clone());
                    }
                }
            }
        }
        out
    }
}
