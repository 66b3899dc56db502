// Runs the shipped multi-agent experiment and prints its synchronization
// series: the share of learner pairs whose best document for a topic agrees.

use viewpoints::simulator::{run, SimulationConfig};

fn main() -> viewpoints::Result<()> {
    let config = SimulationConfig::default_experiment();
    println!(
        "seed {}, {} rounds, {} learners, topics {:?}",
        config.seed,
        config.rounds,
        config.population.len(),
        config.topics.iter().map(|t| t.as_str()).collect::<Vec<_>>()
    );
    let outcome = run(config)?;
    for m in &outcome.metrics {
        let bar = "#".repeat((m.synchronization * 40.0).round() as usize);
        println!("round {:>2}  {:.3} {:<40} +{}", m.round, m.synchronization, bar, m.viewpoints_appended);
    }

    let apple = run(SimulationConfig::apple_learners())?;
    println!(
        "\napple learners: {} feedback events, {} viewpoints in the final graph",
        apple.events.len(),
        apple.graph.viewpoint_count()
    );
    Ok(())
}
