// Replays the five-step "apple" learning session and prints the report.
//
// Three learners, a tutoring system and a mining algorithm share one graph.
// Each step appends feedback and checks what the shortest knowledge paths
// look like afterwards.

use viewpoints::session::{apple_script, execute};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let script = apple_script();
    for (i, step) in script.steps.iter().enumerate() {
        if let Some(note) = &step.note {
            println!("step {}: {note}", i + 1);
        }
    }
    println!();

    let (report, graph) = execute(&script)?;
    print!("{}", report.render());
    println!(
        "final graph: {} resources, {} viewpoints (version {})",
        graph.resource_count(),
        graph.viewpoint_count(),
        graph.version()
    );
    assert!(report.all_passed());
    Ok(())
}
