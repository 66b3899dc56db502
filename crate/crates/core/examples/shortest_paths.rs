// Builds a small graph by hand and asks for every tied shortest path.

use viewpoints::{
    build_map, k_nearest, neighborhood, shortest_paths, Agency, KnowledgeGraph, NewResource, Paradigm,
    Perspective, ResourceKind, Timestamp, ViewpointType,
};

fn main() -> viewpoints::Result<()> {
    let mut g = KnowledgeGraph::new();
    g.add_resource(NewResource::agent("tutor", Agency::Artificial))?;
    g.add_resource(NewResource::agent("kim", Agency::Human))?;
    for doc in ["intro", "lecture", "exercise"] {
        g.add_resource(NewResource::document(doc))?;
    }
    g.add_resource(NewResource::topic("graphs").label("Graph theory"))?;

    let logic = ViewpointType::positive(Paradigm::Logic);
    let feel = ViewpointType::positive(Paradigm::Feel);
    g.add_viewpoint("tutor", "intro", "graphs", logic, Timestamp(1))?;
    g.add_viewpoint("tutor", "lecture", "graphs", logic, Timestamp(1))?;
    g.add_viewpoint("tutor", "exercise", "graphs", logic, Timestamp(1))?;
    g.add_viewpoint("kim", "kim", "intro", feel, Timestamp(2))?;
    g.add_viewpoint("kim", "kim", "lecture", feel, Timestamp(2))?;

    let map = build_map(&g, &Perspective::neutral(), g.max_timestamp())?;
    let answer = shortest_paths(&map, "kim", "graphs")?;
    println!("kim -> graphs: best length {:?}", answer.best_length);
    for path in &answer.paths {
        let ids: Vec<&str> = path.nodes.iter().map(|n| n.as_str()).collect();
        println!("  {}  ({:.3})", ids.join(" - "), path.length);
    }

    // A second like on the lecture breaks the tie.
    g.add_viewpoint("kim", "lecture", "graphs", feel, Timestamp(3))?;
    let map = build_map(&g, &Perspective::neutral(), g.max_timestamp())?;
    let answer = shortest_paths(&map, "kim", "graphs")?;
    println!("after another like: {} path(s), length {:.3}", answer.paths.len(), answer.best_length.unwrap());

    println!("documents nearest to kim:");
    for r in k_nearest(&map, "kim", Some(ResourceKind::Document), 3)? {
        println!("  {} {:.3}", r.id, r.distance);
    }
    let hood = neighborhood(&map, "kim", 1.5)?;
    println!("within 1.5 of kim: {} nodes, {} edges", hood.nodes.len(), hood.edges.len());
    Ok(())
}
