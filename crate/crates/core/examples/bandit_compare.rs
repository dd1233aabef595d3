//! Every policy on the bundled surrogate: late reward and cumulative regret.

use t3p_dbs::bench::{compute_regret, run_experiment, ExperimentConfig};
use t3p_dbs::env::SurrogateSpec;
use t3p_dbs::policy::PolicyParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SurrogateSpec::bundled();
    let best = spec.optimal_arm();
    println!("surrogate optimum: {}", spec.arm[best.0].params());
    for label in ["t3p", "epsilon_greedy", "ucb", "bayes_ucb", "discounted_ucb", "thompson", "random"] {
        let policy = PolicyParams::from_label(label).expect("known label");
        let cfg = ExperimentConfig { policy, seeds: (0..30).collect(), ..ExperimentConfig::default() };
        let log = run_experiment(&cfg)?;
        let regret = compute_regret(&log.records, log.optimal_arm, log.arm_means.as_deref().expect("surrogate means"))?;
        let late: Vec<_> = log.records.iter().filter(|r| r.round >= 60).collect();
        let hit = late.iter().filter(|r| r.arm == best.0).count() as f64 / late.len() as f64;
        let reward = late.iter().map(|r| r.reward).sum::<f64>() / late.len() as f64;
        println!(
            "{label:>15}: reward (rounds 60-75) {reward:+.4}, optimal arm {:>5.1}%, cumulative regret {:.3}",
            hit * 100.0,
            regret.final_mean()
        );
    }
    Ok(())
}
