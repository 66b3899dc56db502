//! Distance queries over a [`KnowledgeMap`].
//!
//! Shortest paths are enumerated exhaustively: Dijkstra keeps every
//! predecessor whose tentative distance ties the best one (within
//! [`TIE_EPSILON`]), and the predecessor DAG is then expanded into paths.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{Pair, ResourceId, ResourceKind};
use crate::perspective::{KnowledgeMap, MapEdge};

/// Path lengths closer than this are ties.
pub const TIE_EPSILON: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub nodes: Vec<ResourceId>,
    pub length: f64,
}

/// Every simple shortest path between two resources, lexicographically
/// ordered by node ids. `best_length` is `None` when unreachable.
#[derive(Clone, Debug, PartialEq)]
pub struct PathAnswer {
    pub source: ResourceId,
    pub target: ResourceId,
    pub best_length: Option<f64>,
    pub paths: Vec<Path>,
}

impl Serialize for PathAnswer {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let paths: Vec<&Vec<ResourceId>> = self.paths.iter().map(|p| &p.nodes).collect();
        let mut s = serializer.serialize_struct("PathAnswer", 4)?;
        s.serialize_field("source", &self.source)?;
        s.serialize_field("target", &self.target)?;
        s.serialize_field("best_length", &self.best_length)?;
        s.serialize_field("paths", &paths)?;
        s.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ranked {
    pub id: ResourceId,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborhoodEdge {
    pub a: ResourceId,
    pub b: ResourceId,
    pub strength: f64,
    pub distance: f64,
}

/// Induced sub-map around an origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Neighborhood {
    pub origin: ResourceId,
    pub radius: f64,
    /// Resources within the radius with their distance from the origin, by id.
    pub nodes: Vec<Ranked>,
    pub edges: Vec<NeighborhoodEdge>,
}

#[derive(Copy, Clone, PartialEq)]
struct MinScored(f64, usize);

impl Eq for MinScored {}

impl PartialOrd for MinScored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MinScored {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

struct Search {
    dist: Vec<f64>,
    preds: Vec<Vec<usize>>,
}

fn dijkstra(map: &KnowledgeMap, source: usize) -> Search {
    let adjacency = map.adjacency();
    let n = adjacency.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(MinScored(0.0, source));
    while let Some(MinScored(d, u)) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        for &(v, w) in &adjacency[u] {
            if settled[v] {
                continue;
            }
            let candidate = d + w;
            if candidate < dist[v] - TIE_EPSILON {
                dist[v] = candidate;
                preds[v].clear();
                preds[v].push(u);
                heap.push(MinScored(candidate, v));
            } else if candidate <= dist[v] + TIE_EPSILON {
                preds[v].push(u);
                if candidate < dist[v] {
                    dist[v] = candidate;
                    heap.push(MinScored(candidate, v));
                }
            }
        }
    }
    Search { dist, preds }
}

fn distinct_pair(map: &KnowledgeMap, a: &str, b: &str) -> Result<(usize, usize)> {
    let ia = map.index_of(a)?;
    let ib = map.index_of(b)?;
    if ia == ib {
        return Err(Error::SameResource(a.to_owned()));
    }
    Ok((ia, ib))
}

fn edge_distance(map: &KnowledgeMap, a: usize, b: usize) -> f64 {
    map.adjacency()[a]
        .iter()
        .find(|&&(v, _)| v == b)
        .map(|&(_, w)| w)
        .expect("predecessor edges exist in the map")
}

pub fn shortest_paths(map: &KnowledgeMap, source: &str, target: &str) -> Result<PathAnswer> {
    let (s, t) = distinct_pair(map, source, target)?;
    let search = dijkstra(map, s);
    let mut answer = PathAnswer {
        source: map.id_at(s).clone(),
        target: map.id_at(t).clone(),
        best_length: None,
        paths: Vec::new(),
    };
    if !search.dist[t].is_finite() {
        return Ok(answer);
    }
    answer.best_length = Some(search.dist[t]);

    // Walk predecessor sets back from the target; the stack holds the
    // reversed partial path.
    let mut raw: Vec<Vec<usize>> = Vec::new();
    let mut on_path = vec![false; map.adjacency().len()];
    let mut stack = vec![t];
    on_path[t] = true;
    expand(&search.preds, s, &mut stack, &mut on_path, &mut raw);

    let mut paths: Vec<Path> = raw
        .into_iter()
        .map(|indices| {
            let length = indices
                .windows(2)
                .map(|w| edge_distance(map, w[0], w[1]))
                .sum();
            Path {
                nodes: indices.iter().map(|&i| map.id_at(i).clone()).collect(),
                length,
            }
        })
        .collect();
    paths.sort_by(|a, b| a.nodes.cmp(&b.nodes));
    answer.paths = paths;
    Ok(answer)
}

fn expand(
    preds: &[Vec<usize>],
    source: usize,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let node = *stack.last().expect("non-empty");
    if node == source {
        out.push(stack.iter().rev().copied().collect());
        return;
    }
    for &p in &preds[node] {
        if on_path[p] {
            continue;
        }
        on_path[p] = true;
        stack.push(p);
        expand(preds, source, stack, on_path, out);
        stack.pop();
        on_path[p] = false;
    }
}

/// Shortest-path distance, `None` when unreachable. Exactly symmetric: the
/// search always starts from the endpoint that sorts first.
pub fn distance(map: &KnowledgeMap, a: &str, b: &str) -> Result<Option<f64>> {
    let (ia, ib) = distinct_pair(map, a, b)?;
    let d = dijkstra(map, ia.min(ib)).dist[ia.max(ib)];
    Ok(d.is_finite().then_some(d))
}

/// Sorts ascending by distance; distances within [`TIE_EPSILON`] of the first
/// member of their run are ordered by id.
fn rank(mut items: Vec<Ranked>) -> Vec<Ranked> {
    items.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.id.cmp(&b.id)));
    let mut start = 0;
    while start < items.len() {
        let anchor = items[start].distance;
        let mut end = start + 1;
        while end < items.len() && items[end].distance - anchor <= TIE_EPSILON {
            end += 1;
        }
        items[start..end].sort_by(|a, b| a.id.cmp(&b.id));
        start = end;
    }
    items
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    Ok(())
}

/// The `k` reachable resources (of `kind`, when given) closest to `origin`.
pub fn k_nearest(
    map: &KnowledgeMap,
    origin: &str,
    kind: Option<ResourceKind>,
    k: usize,
) -> Result<Vec<Ranked>> {
    check_k(k)?;
    let o = map.index_of(origin)?;
    let dist = dijkstra(map, o).dist;
    let candidates = dist
        .iter()
        .enumerate()
        .filter(|&(i, d)| i != o && d.is_finite())
        .filter(|&(i, _)| kind.is_none_or(|kind| map.kind_at(i) == kind))
        .map(|(i, &d)| Ranked {
            id: map.id_at(i).clone(),
            distance: d,
        })
        .collect();
    let mut ranked = rank(candidates);
    ranked.truncate(k);
    Ok(ranked)
}

/// Resources ranked by the length of the best route `origin → r → via`,
/// i.e. `distance(origin, r) + distance(r, via)`.
///
/// This answers "which document do I go through to reach this topic": with
/// `kind = Document` the first entry is the document an agent's shortest
/// knowledge path to the topic passes through.
pub fn nearest_via(
    map: &KnowledgeMap,
    origin: &str,
    via: &str,
    kind: Option<ResourceKind>,
    k: usize,
) -> Result<Vec<Ranked>> {
    check_k(k)?;
    let (o, t) = distinct_pair(map, origin, via)?;
    let from_origin = dijkstra(map, o).dist;
    let from_via = dijkstra(map, t).dist;
    let candidates = (0..from_origin.len())
        .filter(|&i| i != o && i != t)
        .filter(|&i| kind.is_none_or(|kind| map.kind_at(i) == kind))
        .filter_map(|i| {
            let d = from_origin[i] + from_via[i];
            d.is_finite().then(|| Ranked {
                id: map.id_at(i).clone(),
                distance: d,
            })
        })
        .collect();
    let mut ranked = rank(candidates);
    ranked.truncate(k);
    Ok(ranked)
}

/// Resources within `radius` of `origin` (origin included), nearest first,
/// and the map edges among them.
pub fn neighborhood(map: &KnowledgeMap, origin: &str, radius: f64) -> Result<Neighborhood> {
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::InvalidArgument(format!("radius must be non-negative, got {radius}")));
    }
    let o = map.index_of(origin)?;
    let dist = dijkstra(map, o).dist;
    let inside: Vec<bool> = dist.iter().map(|&d| d <= radius + TIE_EPSILON).collect();
    let nodes = rank(
        dist.iter()
            .enumerate()
            .filter(|&(i, _)| inside[i])
            .map(|(i, &d)| Ranked {
                id: map.id_at(i).clone(),
                distance: d,
            })
            .collect(),
    );
    let edges = map
        .edges()
        .iter()
        .filter(|(pair, _)| {
            map.index_of(pair.lo().as_str()).is_ok_and(|i| inside[i])
                && map.index_of(pair.hi().as_str()).is_ok_and(|i| inside[i])
        })
        .map(|(pair, edge): (&Pair, &MapEdge)| NeighborhoodEdge {
            a: pair.lo().clone(),
            b: pair.hi().clone(),
            strength: edge.strength,
            distance: edge.distance,
        })
        .collect();
    Ok(Neighborhood {
        origin: map.id_at(o).clone(),
        radius,
        nodes,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Agency, KnowledgeGraph, NewResource, Paradigm, Timestamp, ViewpointType};
    use crate::perspective::{build_map, Perspective};

    /// Square a-b-d and a-c-d with unit edges plus an isolated e.
    fn diamond() -> KnowledgeMap {
        let mut g = KnowledgeGraph::new();
        g.add_resource(NewResource::agent("x", Agency::Artificial)).unwrap();
        for id in ["a", "b", "c", "d", "e"] {
            g.add_resource(NewResource::document(id)).unwrap();
        }
        let logic = ViewpointType::positive(Paradigm::Logic);
        for (r2, r3) in [("a", "b"), ("b", "d"), ("a", "c"), ("c", "d")] {
            g.add_viewpoint("x", r2, r3, logic, Timestamp(0)).unwrap();
        }
        build_map(&g, &Perspective::neutral(), Timestamp(0)).unwrap()
    }

    fn ids(path: &Path) -> Vec<&str> {
        path.nodes.iter().map(|n| n.as_str()).collect()
    }

    #[test]
    fn enumerates_ties_in_order() {
        let map = diamond();
        let answer = shortest_paths(&map, "d", "a").unwrap();
        assert_eq!(answer.best_length, Some(2.0));
        assert_eq!(answer.paths.len(), 2);
        assert_eq!(ids(&answer.paths[0]), ["d", "b", "a"]);
        assert_eq!(ids(&answer.paths[1]), ["d", "c", "a"]);
        assert!(answer.paths.iter().all(|p| p.length == 2.0));
    }

    #[test]
    fn unreachable_and_errors() {
        let map = diamond();
        let answer = shortest_paths(&map, "a", "e").unwrap();
        assert_eq!(answer.best_length, None);
        assert!(answer.paths.is_empty());
        assert_eq!(
            serde_json::to_string(&answer).unwrap(),
            r#"{"source":"a","target":"e","best_length":null,"paths":[]}"#
        );
        assert!(matches!(shortest_paths(&map, "a", "a"), Err(Error::SameResource(_))));
        assert!(matches!(shortest_paths(&map, "a", "zz"), Err(Error::UnknownResource(_))));
        assert_eq!(distance(&map, "a", "e").unwrap(), None);
    }

    #[test]
    fn k_nearest_breaks_ties_by_id() {
        let map = diamond();
        let near = k_nearest(&map, "a", None, 10).unwrap();
        let got: Vec<(&str, f64)> = near.iter().map(|r| (r.id.as_str(), r.distance)).collect();
        assert_eq!(got, [("b", 1.0), ("c", 1.0), ("d", 2.0)]);
        assert_eq!(k_nearest(&map, "a", None, 1).unwrap()[0].id.as_str(), "b");
        assert!(k_nearest(&map, "a", Some(ResourceKind::Topic), 3).unwrap().is_empty());
        assert!(matches!(k_nearest(&map, "a", None, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn neighborhood_radius() {
        let map = diamond();
        let zero = neighborhood(&map, "a", 0.0).unwrap();
        assert_eq!(zero.nodes.len(), 1);
        assert!(zero.edges.is_empty());
        let one = neighborhood(&map, "a", 1.0).unwrap();
        assert_eq!(one.nodes.len(), 3);
        assert_eq!(one.edges.len(), 2);
        let all = neighborhood(&map, "a", 100.0).unwrap();
        assert_eq!(all.nodes.len(), 4);
        assert_eq!(all.edges.len(), 4);
        assert!(neighborhood(&map, "a", -1.0).is_err());
    }

    #[test]
    fn nearest_via_sums_both_legs() {
        let map = diamond();
        let via = nearest_via(&map, "a", "d", None, 5).unwrap();
        let got: Vec<(&str, f64)> = via.iter().map(|r| (r.id.as_str(), r.distance)).collect();
        assert_eq!(got, [("b", 2.0), ("c", 2.0)]);
    }
}
