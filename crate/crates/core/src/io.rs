//! Event-log persistence and map export.
//!
//! The log is JSON Lines: one object per append, `seq` counting from 1 with
//! no gaps. Resource lines carry `id, label, rkind, agency, at`; viewpoint
//! lines carry `id, emitter, r2, r3, paradigm, polarity, at`, with `r2 < r3`.

use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    Agency, Entry, KnowledgeGraph, Pair, Paradigm, Polarity, Resource, ResourceId, ResourceKind,
    Timestamp, Viewpoint, ViewpointId, ViewpointType,
};
use crate::perspective::KnowledgeMap;

#[derive(Clone, Debug, PartialEq)]
pub enum Event {
    Resource(Resource),
    Viewpoint(Viewpoint),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventRecord {
    pub seq: u64,
    pub event: Event,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RecordKind {
    Resource,
    Viewpoint,
}

/// Flat wire form; field order is the canonical key order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRecord {
    seq: u64,
    kind: RecordKind,
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rkind: Option<ResourceKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    agency: Option<Agency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    emitter: Option<ResourceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r2: Option<ResourceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r3: Option<ResourceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    paradigm: Option<Paradigm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polarity: Option<Polarity>,
    at: Timestamp,
}

impl Serialize for EventRecord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_wire().serialize(serializer)
    }
}

impl EventRecord {
    fn to_wire(&self) -> WireRecord {
        match &self.event {
            Event::Resource(r) => WireRecord {
                seq: self.seq,
                kind: RecordKind::Resource,
                id: r.id.to_string(),
                label: Some(r.label.clone()),
                rkind: Some(r.kind),
                agency: r.agency,
                emitter: None,
                r2: None,
                r3: None,
                paradigm: None,
                polarity: None,
                at: r.created_at,
            },
            Event::Viewpoint(v) => WireRecord {
                seq: self.seq,
                kind: RecordKind::Viewpoint,
                id: v.id.to_string(),
                label: None,
                rkind: None,
                agency: None,
                emitter: Some(v.emitter.clone()),
                r2: Some(v.pair.lo().clone()),
                r3: Some(v.pair.hi().clone()),
                paradigm: Some(v.vtype.paradigm),
                polarity: Some(v.vtype.polarity),
                at: v.at,
            },
        }
    }

    fn from_wire(w: WireRecord) -> std::result::Result<Self, String> {
        let missing = |field: &str| format!("{:?} record without `{field}`", w.kind);
        let event = match w.kind {
            RecordKind::Resource => Event::Resource(Resource {
                id: ResourceId::new(w.id.clone()).map_err(|e| e.to_string())?,
                kind: w.rkind.ok_or_else(|| missing("rkind"))?,
                agency: w.agency,
                label: w.label.clone().ok_or_else(|| missing("label"))?,
                created_at: w.at,
            }),
            RecordKind::Viewpoint => {
                let r2 = w.r2.clone().ok_or_else(|| missing("r2"))?;
                let r3 = w.r3.clone().ok_or_else(|| missing("r3"))?;
                Event::Viewpoint(Viewpoint {
                    id: ViewpointId::new(w.id.clone()),
                    emitter: w.emitter.clone().ok_or_else(|| missing("emitter"))?,
                    pair: Pair::new(r2, r3).ok_or("viewpoint links a resource to itself")?,
                    vtype: ViewpointType::new(
                        w.paradigm.ok_or_else(|| missing("paradigm"))?,
                        w.polarity.ok_or_else(|| missing("polarity"))?,
                    ),
                    at: w.at,
                })
            }
        };
        Ok(EventRecord { seq: w.seq, event })
    }

    /// One log line, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(&self.to_wire()).expect("record serializes")
    }

    /// Parses one line; `line_no` is used for error reporting.
    pub fn from_line(line: &str, line_no: usize) -> Result<Self> {
        let corrupt = |reason: String| Error::CorruptLine {
            line: line_no,
            reason,
        };
        let wire: WireRecord = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
        EventRecord::from_wire(wire).map_err(corrupt)
    }
}

/// Records for every append after `since`, in order.
pub fn records_since(graph: &KnowledgeGraph, since: u64) -> Vec<EventRecord> {
    graph
        .entries()
        .iter()
        .enumerate()
        .skip(since as usize)
        .map(|(i, entry)| EventRecord {
            seq: i as u64 + 1,
            event: match *entry {
                Entry::Resource(r) => Event::Resource(graph.resources()[r].clone()),
                Entry::Viewpoint(v) => Event::Viewpoint(graph.viewpoints()[v].clone()),
            },
        })
        .collect()
}

pub fn records(graph: &KnowledgeGraph) -> Vec<EventRecord> {
    records_since(graph, 0)
}

fn apply(graph: &mut KnowledgeGraph, record: EventRecord) -> Result<()> {
    match record.event {
        Event::Resource(r) => graph.insert_resource(r),
        Event::Viewpoint(v) => graph.insert_viewpoint(v),
    }
}

/// Writes the whole graph as a log.
pub fn write_log(graph: &KnowledgeGraph, mut out: impl Write) -> Result<()> {
    for record in records(graph) {
        writeln!(out, "{}", record.to_line())?;
    }
    out.flush()?;
    Ok(())
}

/// Rebuilds a graph from a log stream.
pub fn replay(input: impl BufRead) -> Result<KnowledgeGraph> {
    let mut graph = KnowledgeGraph::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let record = EventRecord::from_line(&line, line_no)?;
        let expected = graph.version() + 1;
        if record.seq != expected {
            return Err(Error::SequenceGap {
                expected,
                found: record.seq,
            });
        }
        apply(&mut graph, record).map_err(|e| Error::CorruptLine {
            line: line_no,
            reason: e.to_string(),
        })?;
    }
    Ok(graph)
}

pub fn replay_str(log: &str) -> Result<KnowledgeGraph> {
    replay(log.as_bytes())
}

/// Append handle on a log file. Each append is one flushed line.
#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
    last_seq: u64,
}

impl EventLog {
    /// Creates (or truncates) an empty log.
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path)?;
        Ok(Self {
            path,
            file,
            last_seq: 0,
        })
    }

    /// Opens an existing log (or creates an empty one), replaying it.
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, KnowledgeGraph)> {
        let path = path.as_ref().to_path_buf();
        let graph = match File::open(&path) {
            Ok(file) => replay(BufReader::new(file))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => KnowledgeGraph::new(),
            Err(e) => return Err(e.into()),
        };
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok((
            Self {
                path,
                file,
                last_seq: graph.version(),
            },
            graph,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    pub fn append(&mut self, record: &EventRecord) -> Result<()> {
        let expected = self.last_seq + 1;
        if record.seq != expected {
            return Err(Error::SequenceGap {
                expected,
                found: record.seq,
            });
        }
        let mut line = record.to_line();
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        self.last_seq = record.seq;
        Ok(())
    }

    /// Appends every record of `graph` past the log's last sequence number.
    pub fn sync(&mut self, graph: &KnowledgeGraph) -> Result<()> {
        for record in records_since(graph, self.last_seq) {
            self.append(&record)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown export format `{other}`"))),
        }
    }
}

#[derive(Serialize)]
struct JsonNode<'a> {
    id: &'a ResourceId,
    kind: ResourceKind,
    label: &'a str,
}

#[derive(Serialize)]
struct JsonEdge<'a> {
    a: &'a ResourceId,
    b: &'a ResourceId,
    strength: f64,
    distance: f64,
}

#[derive(Serialize)]
struct JsonMap<'a> {
    nodes: Vec<JsonNode<'a>>,
    edges: Vec<JsonEdge<'a>>,
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Serializes the connected part of a map. Nodes are the resources incident
/// to at least one edge; both nodes and edges are in ascending id order.
pub fn export_map(map: &KnowledgeMap, format: ExportFormat) -> Vec<u8> {
    let nodes = map.connected_ids();
    match format {
        ExportFormat::Dot => {
            let mut out = String::from("graph knowledge_map {\n");
            for id in &nodes {
                let node = map.node(id.as_str()).expect("map node");
                let _ = writeln!(out, "  {} [label={}];", dot_quote(id.as_str()), dot_quote(&node.label));
            }
            for (pair, edge) in map.edges() {
                let _ = writeln!(
                    out,
                    "  {} -- {} [distance={:.6}];",
                    dot_quote(pair.lo().as_str()),
                    dot_quote(pair.hi().as_str()),
                    edge.distance
                );
            }
            out.push_str("}\n");
            out.into_bytes()
        }
        ExportFormat::Json => {
            let doc = JsonMap {
                nodes: nodes
                    .iter()
                    .map(|id| {
                        let node = map.node(id.as_str()).expect("map node");
                        JsonNode {
                            id,
                            kind: node.kind,
                            label: &node.label,
                        }
                    })
                    .collect(),
                edges: map
                    .edges()
                    .iter()
                    .map(|(pair, e)| JsonEdge {
                        a: pair.lo(),
                        b: pair.hi(),
                        strength: e.strength,
                        distance: e.distance,
                    })
                    .collect(),
            };
            let mut bytes = serde_json::to_vec(&doc).expect("map serializes");
            bytes.push(b'\n');
            bytes
        }
    }
}
