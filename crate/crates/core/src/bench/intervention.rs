use serde::{Deserialize, Serialize};

use super::regret::group_by_seed;
use super::run::{argmax, run_prepared};
use super::{BenchError, ExperimentConfig, PreparedEnv, RunLog};
use crate::stim::{build_arm_space, ArmId};

/// Consecutive plays of the same arm that count as stable.
pub const STABLE_RUN: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedConvergence {
    pub seed: u64,
    /// Greedy arm after each round.
    pub greedy: Vec<usize>,
    /// First round of a run of [`STABLE_RUN`] plays of the second-best arm
    /// after the event.
    pub stable_from: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionReport {
    pub event_round: usize,
    pub pruned: ArmId,
    /// Best remaining arm by expected reward.
    pub second_best: ArmId,
    pub seeds: Vec<SeedConvergence>,
}

impl InterventionReport {
    /// Fraction of seeds whose stable second-best play began by `round`.
    pub fn converged_by(&self, round: usize) -> f64 {
        let hit = self.seeds.iter().filter(|s| s.stable_from.is_some_and(|r| r <= round)).count();
        hit as f64 / self.seeds.len() as f64
    }
}

fn first_stable(arms: &[usize], after: usize, target: usize) -> Option<usize> {
    let mut streak = 0;
    for (i, &a) in arms.iter().enumerate().skip(after) {
        if a == target {
            streak += 1;
            if streak == STABLE_RUN {
                return Some(i + 2 - STABLE_RUN);
            }
        } else {
            streak = 0;
        }
    }
    None
}

/// Runs `cfg` (which must script exactly one intervention) and reports how
/// each seed settles after the pruned arm disappears.
pub fn intervention_run(cfg: &ExperimentConfig) -> Result<(RunLog, InterventionReport), BenchError> {
    cfg.validate()?;
    let [event] = cfg.interventions[..] else {
        return Err(BenchError::Config(format!(
            "intervention run needs exactly one intervention, found {}",
            cfg.interventions.len()
        )));
    };
    let prepared = PreparedEnv::from_config(cfg)?;
    let means = prepared
        .arm_means()
        .ok_or_else(|| BenchError::Config("intervention report needs arm means for the environment".into()))?;
    let space = build_arm_space();
    let pruned = match event.arm {
        Some(p) => space.find(p).ok_or_else(|| BenchError::Config(format!("{p} is not a grid arm")))?,
        None => prepared.optimal_arm(&space, cfg.optimal_arm)?,
    };
    let mut remaining = means.clone();
    remaining[pruned.0] = f64::NEG_INFINITY;
    let second_best = argmax(&remaining);

    let log = run_prepared(cfg, &prepared)?;
    let seeds = group_by_seed(&log.records)
        .into_iter()
        .map(|(seed, recs)| {
            let arms: Vec<usize> = recs.iter().map(|r| r.arm).collect();
            SeedConvergence {
                seed,
                greedy: recs.iter().map(|r| r.greedy).collect(),
                stable_from: first_stable(&arms, event.round, second_best.0),
            }
        })
        .collect();
    Ok((log, InterventionReport { event_round: event.round, pruned, second_best, seeds }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::Intervention;
    use crate::env::SurrogateSpec;

    #[test]
    fn stable_run_detection() {
        let mut arms = vec![1; 5];
        arms.extend([2; 3]);
        arms.push(1);
        arms.extend([2; 10]);
        assert_eq!(first_stable(&arms, 5, 2), Some(10));
        assert_eq!(first_stable(&arms[..18], 5, 2), None);
        assert_eq!(first_stable(&[2; 10], 0, 2), Some(1));
    }

    #[test]
    fn event_must_precede_last_round() {
        let cfg = ExperimentConfig {
            rounds: 75,
            interventions: vec![Intervention { round: 75, arm: None }],
            ..ExperimentConfig::default()
        };
        assert!(matches!(intervention_run(&cfg), Err(BenchError::Config(_))));
    }

    #[test]
    fn pruning_a_never_greedy_arm_changes_nothing() {
        let spec = SurrogateSpec::bundled();
        let worst = *spec.ranking().last().unwrap();
        let plain = ExperimentConfig { rounds: 100, seeds: vec![0, 1, 2], ..ExperimentConfig::default() };
        let event = Intervention { round: 60, arm: Some(spec.arm[worst.0].params()) };
        let cfg = ExperimentConfig { interventions: vec![event], ..plain.clone() };
        let (log, report) = intervention_run(&cfg).unwrap();
        let base = crate::bench::run_experiment(&plain).unwrap();
        let greedy = |l: &RunLog| l.records.iter().map(|r| r.greedy).collect::<Vec<_>>();
        assert_eq!(greedy(&log), greedy(&base));
        assert_eq!(report.pruned, worst);
    }
}
