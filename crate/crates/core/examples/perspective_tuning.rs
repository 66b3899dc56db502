// The same graph read through different perspectives.
//
// Perspectives never change the stored viewpoints; they only change how each
// beam is weighed when the map is built.

use viewpoints::session::{apple_script, graph_through};
use viewpoints::{build_map, shortest_paths, Paradigm, Perspective, ResourceId, Timestamp};

fn show(label: &str, p: &Perspective, now: u64) -> viewpoints::Result<()> {
    let graph = graph_through(&apple_script(), 4)?;
    let map = build_map(&graph, p, Timestamp(now))?;
    let answer = shortest_paths(&map, "B", "apple")?;
    let paths: Vec<String> = answer
        .paths
        .iter()
        .map(|p| p.nodes.iter().map(|n| n.as_str()).collect::<Vec<_>>().join("-"))
        .collect();
    match answer.best_length {
        Some(len) => println!("{label:<28} {len:>7.4}  {}", paths.join(", ")),
        None => println!("{label:<28} unreachable"),
    }
    Ok(())
}

fn main() -> viewpoints::Result<()> {
    let b = ResourceId::new("B")?;
    println!("B -> apple after step 4\n");
    show("neutral", &Perspective::neutral(), 4)?;
    show("exclude own feelings", &Perspective::neutral().excluding(b.clone()), 4)?;
    show("distrust A", &Perspective::neutral().with_trust(ResourceId::new("A")?, 0.1), 4)?;
    show("feelings count double", &Perspective::neutral().with_paradigm_weight(Paradigm::Feel, 2.0), 4)?;
    show("ignore mining", &Perspective::neutral().with_paradigm_weight(Paradigm::Mine, 0.0), 4)?;
    show("half-life 1, read at t=8", &Perspective::neutral().with_half_life(1.0), 8)?;

    let custom = Perspective::from_json(r#"{"paradigm_weights": {"logic": 0.5}, "exclude_emitters": ["B"]}"#)?;
    println!("\ncanonical form: {}", custom.to_json());
    show("from JSON", &custom, 4)?;
    Ok(())
}
