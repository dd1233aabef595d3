//! Removes the optimal arm after round 75 and reports how each seed recovers.

use t3p_dbs::bench::{intervention_run, ExperimentConfig, Intervention};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        rounds: 130,
        seeds: (0..30).collect(),
        interventions: vec![Intervention { round: 75, arm: None }],
        ..ExperimentConfig::default()
    };
    let (_, report) = intervention_run(&cfg)?;
    println!("pruned arm {}, second best arm {}", report.pruned, report.second_best);
    for s in &report.seeds {
        let greedy_after: Vec<usize> = s.greedy[report.event_round..].iter().take(12).copied().collect();
        println!("seed {:>2}: stable from {:?}, greedy after event {greedy_after:?}", s.seed, s.stable_from);
    }
    println!("converged by round 115: {:.0}%", 100.0 * report.converged_by(115));
    Ok(())
}
