// Persists a session to a JSON Lines event log and rebuilds it.

use std::io::BufReader;

use viewpoints::io::{replay, write_log, EventLog};
use viewpoints::session::{apple_script, execute};
use viewpoints::{build_map, shortest_paths, Perspective, Timestamp};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("viewpoints-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("apple.jsonl");

    let (_, graph) = execute(&apple_script())?;
    write_log(&graph, std::fs::File::create(&path)?)?;
    let text = std::fs::read_to_string(&path)?;
    println!("{} events written to {}", text.lines().count(), path.display());
    for line in text.lines().take(2).chain(text.lines().skip(21)) {
        println!("  {line}");
    }

    let replayed = replay(BufReader::new(std::fs::File::open(&path)?))?;
    assert_eq!(replayed.version(), graph.version());
    let map = build_map(&replayed, &Perspective::neutral(), Timestamp(4))?;
    let answer = shortest_paths(&map, "B", "apple")?;
    println!("replayed B -> apple: {:?}", answer.best_length);

    // Appending through an open log only writes records it has not seen.
    let (mut log, mut g) = EventLog::open(&path)?;
    g.add_resource(viewpoints::NewResource::document("D4").at(Timestamp(5)))?;
    log.sync(&g)?;
    println!("after sync: last seq {}", log.last_seq());

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
