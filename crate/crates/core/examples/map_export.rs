// Writes the step-4 knowledge map as Graphviz DOT and as JSON.

use viewpoints::io::{export_map, ExportFormat};
use viewpoints::session::{apple_script, graph_through};
use viewpoints::{build_map, Perspective, Timestamp};

fn main() -> viewpoints::Result<()> {
    let graph = graph_through(&apple_script(), 4)?;
    let map = build_map(&graph, &Perspective::neutral(), Timestamp(4))?;
    print!("{}", String::from_utf8_lossy(&export_map(&map, ExportFormat::Dot)));
    println!();
    let json: serde_json::Value = serde_json::from_slice(&export_map(&map, ExportFormat::Json)).unwrap();
    println!("{}", serde_json::to_string_pretty(&json["edges"][0]).unwrap());
    println!("{} nodes, {} edges", json["nodes"].as_array().unwrap().len(), json["edges"].as_array().unwrap().len());
    Ok(())
}
