//! Event-sourced subjective knowledge graph.
//!
//! Agents emit *viewpoints*: timestamped, subjective links between two
//! knowledge resources (agents, documents, topics). The store only appends.
//! Consumers read it through a *perspective* of their own (paradigm weights,
//! trust, recency decay, exclusions), which turns each beam of viewpoints
//! into a proximity and yields a *knowledge map* where shortest knowledge
//! paths can be queried. Feedback on what a query returned is appended as new
//! viewpoints, so frequently confirmed paths get shorter.
//!
//! ```
//! use viewpoints::{build_map, session, shortest_paths, Perspective, Timestamp};
//!
//! let script = session::apple_script();
//! let graph = session::graph_through(&script, 2).unwrap();
//! let map = build_map(&graph, &Perspective::neutral(), Timestamp(2)).unwrap();
//! let answer = shortest_paths(&map, "B", "apple").unwrap();
//! assert_eq!(answer.paths.len(), 2);
//! assert_eq!(answer.best_length, Some(2.5));
//! ```
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example <name>`.

pub mod cli;
pub mod error;
pub mod graph;
pub mod io;
pub mod perspective;
pub mod query;
pub mod service;
pub mod session;
pub mod simulator;

pub use error::{Error, Result};
pub use graph::{
    Agency, KnowledgeGraph, NewResource, Pair, Paradigm, Polarity, Resource, ResourceId,
    ResourceKind, Timestamp, Viewpoint, ViewpointId, ViewpointType,
};
pub use perspective::{beam_strength, build_map, evaluate_viewpoint, KnowledgeMap, MapEdge, Perspective};
pub use query::{distance, k_nearest, nearest_via, neighborhood, shortest_paths, Path, PathAnswer, TIE_EPSILON};
