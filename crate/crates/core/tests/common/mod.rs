//! Brute-force reference implementations and random graph generators shared
//! by the integration suites. Nothing here calls the map builder or the
//! path search under test.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use viewpoints::{
    Agency, KnowledgeGraph, NewResource, Paradigm, Perspective, Polarity, ResourceId, ResourceKind,
    Timestamp, ViewpointType,
};

pub const EPS: f64 = 1e-9;

/// Proximity of every linked pair, computed straight from the viewpoint list.
pub fn oracle_strengths(
    graph: &KnowledgeGraph,
    p: &Perspective,
    now: Timestamp,
) -> BTreeMap<(String, String), f64> {
    let mut sums: BTreeMap<(String, String), f64> = BTreeMap::new();
    for vp in graph.viewpoints() {
        let key = (vp.pair.lo().to_string(), vp.pair.hi().to_string());
        let mut value = 0.0;
        if !p.exclude_emitters.contains(&vp.emitter) {
            let w = match vp.vtype.paradigm {
                Paradigm::Logic => p.paradigm_weights.logic,
                Paradigm::Mine => p.paradigm_weights.mine,
                Paradigm::Feel => p.paradigm_weights.feel,
            };
            let t = p.trust.per_agent.get(&vp.emitter).copied().unwrap_or(p.trust.default);
            let sign = match vp.vtype.polarity {
                Polarity::Positive => 1.0,
                Polarity::Negative => -1.0,
            };
            let decay = match p.half_life {
                None => 1.0,
                Some(h) => 0.5f64.powf((now.0 - vp.at.0) as f64 / h),
            };
            value = sign * w * t * decay;
        }
        *sums.entry(key).or_insert(0.0) += value;
    }
    sums.into_iter()
        .map(|(k, s)| (k, if p.clamp_negative { s.max(0.0) } else { s }))
        .collect()
}

/// Adjacency with distances for every pair of positive strength.
pub fn oracle_edges(
    graph: &KnowledgeGraph,
    p: &Perspective,
    now: Timestamp,
) -> BTreeMap<String, Vec<(String, f64)>> {
    let mut adj: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for r in graph.resources() {
        adj.entry(r.id.to_string()).or_default();
    }
    for ((a, b), s) in oracle_strengths(graph, p, now) {
        if s > 0.0 {
            adj.get_mut(&a).unwrap().push((b.clone(), 1.0 / s));
            adj.get_mut(&b).unwrap().push((a, 1.0 / s));
        }
    }
    adj
}

/// Every minimal simple path between two nodes, found by exhaustive
/// depth-first enumeration. Branches already longer than the best complete
/// path (plus tolerance) are cut, which cannot discard a tied path because
/// all distances are positive.
pub fn oracle_paths(
    adj: &BTreeMap<String, Vec<(String, f64)>>,
    source: &str,
    target: &str,
) -> (Option<f64>, Vec<Vec<String>>) {
    fn walk(
        adj: &BTreeMap<String, Vec<(String, f64)>>,
        target: &str,
        stack: &mut Vec<String>,
        length: f64,
        found: &mut Vec<(f64, Vec<String>)>,
        best: &mut f64,
    ) {
        if length > *best + EPS {
            return;
        }
        let here = stack.last().unwrap().clone();
        if here == target {
            *best = best.min(length);
            found.push((length, stack.clone()));
            return;
        }
        for (next, d) in &adj[&here] {
            if stack.contains(next) {
                continue;
            }
            stack.push(next.clone());
            walk(adj, target, stack, length + d, found, best);
            stack.pop();
        }
    }
    let mut found = Vec::new();
    let mut best = f64::INFINITY;
    walk(adj, target, &mut vec![source.to_string()], 0.0, &mut found, &mut best);
    if found.is_empty() {
        return (None, Vec::new());
    }
    let mut paths: Vec<Vec<String>> = found
        .into_iter()
        .filter(|(l, _)| *l <= best + EPS)
        .map(|(_, p)| p)
        .collect();
    paths.sort();
    paths.dedup();
    (Some(best), paths)
}

/// Shortest distance by the same enumeration, `None` when unreachable.
pub fn oracle_distance(adj: &BTreeMap<String, Vec<(String, f64)>>, a: &str, b: &str) -> Option<f64> {
    if a == b {
        return Some(0.0);
    }
    oracle_paths(adj, a, b).0
}

pub fn id(s: &str) -> ResourceId {
    ResourceId::new(s).unwrap()
}

/// A random graph with at most `max_resources` resources and
/// `max_viewpoints` viewpoints. Timestamps never decrease, so every emitter's
/// sequence is monotone.
pub fn random_graph(rng: &mut StdRng, max_resources: usize, max_viewpoints: usize) -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    let n = rng.random_range(2..=max_resources);
    let agents = rng.random_range(1..=n.min(4));
    for i in 0..n {
        let new = if i < agents {
            let agency = if rng.random_bool(0.5) { Agency::Human } else { Agency::Artificial };
            NewResource::agent(&format!("a{i}"), agency)
        } else if rng.random_bool(0.7) {
            NewResource::document(&format!("d{i}"))
        } else {
            NewResource::topic(&format!("t{i}"))
        };
        g.add_resource(new).unwrap();
    }
    let ids: Vec<String> = g.resources().iter().map(|r| r.id.to_string()).collect();
    let mut at = 0u64;
    for _ in 0..rng.random_range(0..=max_viewpoints) {
        let emitter = format!("a{}", rng.random_range(0..agents));
        let x = rng.random_range(0..n);
        let mut y = rng.random_range(0..n - 1);
        if y >= x {
            y += 1;
        }
        let paradigm = Paradigm::ALL[rng.random_range(0..3)];
        let polarity = if rng.random_bool(0.8) { Polarity::Positive } else { Polarity::Negative };
        at += rng.random_range(0..=2);
        g.add_viewpoint(&emitter, &ids[x], &ids[y], ViewpointType::new(paradigm, polarity), Timestamp(at))
            .unwrap();
    }
    g
}

/// A random valid perspective over the agents of `graph`.
pub fn random_perspective(rng: &mut StdRng, graph: &KnowledgeGraph) -> Perspective {
    const WEIGHTS: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 3.0];
    let mut p = Perspective::neutral();
    for paradigm in Paradigm::ALL {
        let w = if rng.random_bool(0.3) { rng.random_range(0.1..4.0) } else { WEIGHTS[rng.random_range(0..WEIGHTS.len())] };
        p.paradigm_weights.set(paradigm, w);
    }
    p.trust.default = WEIGHTS[rng.random_range(1..WEIGHTS.len())];
    for r in graph.resources().iter().filter(|r| r.kind == ResourceKind::Agent) {
        if rng.random_bool(0.3) {
            p.trust.per_agent.insert(r.id.clone(), rng.random_range(0.0..3.0));
        }
        if rng.random_bool(0.15) {
            p.exclude_emitters.insert(r.id.clone());
        }
    }
    if rng.random_bool(0.4) {
        p.half_life = Some([0.5, 1.0, 2.0, 7.5][rng.random_range(0..4)]);
    }
    p.clamp_negative = rng.random_bool(0.8);
    p
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
