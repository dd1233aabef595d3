use serde::{Deserialize, Serialize};

use super::{BenchError, RunRecord};
use crate::stim::ArmId;

/// Mean and sample standard deviation across seeds at one round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundStat {
    pub round: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedRegret {
    pub seed: u64,
    pub instantaneous: Vec<f64>,
    pub cumulative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretSeries {
    pub optimal: ArmId,
    pub instantaneous: Vec<RoundStat>,
    pub cumulative: Vec<RoundStat>,
    pub per_seed: Vec<SeedRegret>,
}

impl RegretSeries {
    /// Mean cumulative regret at the final round.
    pub fn final_mean(&self) -> f64 {
        self.cumulative.last().map_or(0.0, |s| s.mean)
    }
}

/// Instantaneous and cumulative regret of a sequence of plays.
pub fn regret_path(plays: &[ArmId], optimal: ArmId, means: &[f64]) -> Result<(Vec<f64>, Vec<f64>), BenchError> {
    let best = *means.get(optimal.0).ok_or(BenchError::UnknownArm(optimal))?;
    let mut inst = Vec::with_capacity(plays.len());
    let mut cum = Vec::with_capacity(plays.len());
    let mut total = 0.0;
    for &arm in plays {
        let r = best - means.get(arm.0).ok_or(BenchError::UnknownArm(arm))?;
        total += r;
        inst.push(r);
        cum.push(total);
    }
    Ok((inst, cum))
}

pub(crate) fn group_by_seed(records: &[RunRecord]) -> Vec<(u64, Vec<&RunRecord>)> {
    let mut out: Vec<(u64, Vec<&RunRecord>)> = Vec::new();
    for r in records {
        match out.iter_mut().find(|(s, _)| *s == r.seed) {
            Some((_, v)) => v.push(r),
            None => out.push((r.seed, vec![r])),
        }
    }
    for (_, v) in &mut out {
        v.sort_by_key(|r| r.round);
    }
    out
}

pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn per_round(columns: &[Vec<f64>]) -> Vec<RoundStat> {
    let len = columns.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let xs: Vec<f64> = columns.iter().map(|c| c[i]).collect();
            let (mean, std) = mean_std(&xs);
            RoundStat { round: i + 1, mean, std }
        })
        .collect()
}

/// Regret of every seed in `records` against `optimal`, aggregated per round.
pub fn compute_regret(records: &[RunRecord], optimal: ArmId, means: &[f64]) -> Result<RegretSeries, BenchError> {
    let mut per_seed = Vec::new();
    for (seed, recs) in group_by_seed(records) {
        let plays: Vec<ArmId> = recs.iter().map(|r| ArmId(r.arm)).collect();
        let (instantaneous, cumulative) = regret_path(&plays, optimal, means)?;
        per_seed.push(SeedRegret { seed, instantaneous, cumulative });
    }
    let inst: Vec<Vec<f64>> = per_seed.iter().map(|s| s.instantaneous.clone()).collect();
    let cum: Vec<Vec<f64>> = per_seed.iter().map(|s| s.cumulative.clone()).collect();
    Ok(RegretSeries { optimal, instantaneous: per_round(&inst), cumulative: per_round(&cum), per_seed })
}

/// Mean and spread of the observed reward at each round.
pub fn reward_by_round(records: &[RunRecord]) -> Vec<RoundStat> {
    let cols: Vec<Vec<f64>> =
        group_by_seed(records).into_iter().map(|(_, recs)| recs.iter().map(|r| r.reward).collect()).collect();
    per_round(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn always_optimal_is_zero() {
        let (inst, cum) = regret_path(&[ArmId(1); 5], ArmId(1), &[0.2, 0.9, 0.1]).unwrap();
        assert!(inst.iter().chain(&cum).all(|&r| r == 0.0));
    }

    #[test]
    fn hand_prefix_sum() {
        let (inst, cum) = regret_path(&[ArmId(1), ArmId(0)], ArmId(0), &[1.0, 0.4]).unwrap();
        assert_eq!(inst, vec![0.6, 0.0]);
        assert_eq!(cum, vec![0.6, 0.6]);
    }

    #[test]
    fn unknown_arm_reported() {
        assert!(matches!(regret_path(&[ArmId(3)], ArmId(0), &[1.0]), Err(BenchError::UnknownArm(ArmId(3)))));
        assert!(matches!(regret_path(&[], ArmId(2), &[1.0]), Err(BenchError::UnknownArm(ArmId(2)))));
    }

    #[test]
    fn mean_std_small_cases() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
