use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::regret::{group_by_seed, mean_std};
use super::run::run_prepared;
use super::{BenchError, ExperimentConfig, PreparedEnv};
use crate::policy::{PolicyParams, T3pConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub eps_values: Vec<f64>,
    pub k_values: Vec<usize>,
    pub runs_per_cell: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            eps_values: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            k_values: vec![5, 10, 15, 20, 25, 30],
            runs_per_cell: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub epsilon: f64,
    pub k: usize,
    /// Mean over runs of the reward summed over all rounds.
    pub mean_cumulative_reward: f64,
    pub std_cumulative_reward: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub eps_values: Vec<f64>,
    pub k_values: Vec<usize>,
    /// Row-major by ε, then K.
    pub cells: Vec<GridCell>,
}

impl Heatmap {
    /// Cell with the highest mean cumulative reward; the first one on ties.
    pub fn best(&self) -> &GridCell {
        let mut best = &self.cells[0];
        for c in &self.cells[1..] {
            if c.mean_cumulative_reward > best.mean_cumulative_reward {
                best = c;
            }
        }
        best
    }
}

/// T3P over every (ε, K) pair. Each cell runs `runs_per_cell` seeds counting
/// up from the first seed of `cfg`, so all cells see the same seeds. Other
/// T3P settings come from `cfg.policy` when it is a T3P policy.
pub fn grid_search(grid: &GridSpec, cfg: &ExperimentConfig) -> Result<Heatmap, BenchError> {
    if grid.eps_values.is_empty() || grid.k_values.is_empty() || grid.runs_per_cell == 0 {
        return Err(BenchError::Config("grid needs ε values, K values and at least one run per cell".into()));
    }
    cfg.validate()?;
    let base = match cfg.policy {
        PolicyParams::T3p(t) => t,
        _ => T3pConfig::default(),
    };
    let first = cfg.seeds[0];
    let seeds: Vec<u64> = (0..grid.runs_per_cell as u64).map(|i| first.wrapping_add(i)).collect();
    let prepared = PreparedEnv::from_config(cfg)?;
    let pairs: Vec<(f64, usize)> =
        grid.eps_values.iter().flat_map(|&e| grid.k_values.iter().map(move |&k| (e, k))).collect();
    let cells: Vec<Result<GridCell, BenchError>> = pairs
        .par_iter()
        .map(|&(epsilon, k)| {
            let policy = PolicyParams::T3p(T3pConfig { eps_start: epsilon, k, ..base });
            let cell_cfg = ExperimentConfig { policy, seeds: seeds.clone(), ..cfg.clone() };
            cell_cfg.validate()?;
            let log = run_prepared(&cell_cfg, &prepared)?;
            let totals: Vec<f64> =
                group_by_seed(&log.records).into_iter().map(|(_, recs)| recs.iter().map(|r| r.reward).sum()).collect();
            let (mean, std) = mean_std(&totals);
            Ok(GridCell { epsilon, k, mean_cumulative_reward: mean, std_cumulative_reward: std, runs: totals.len() })
        })
        .collect();
    Ok(Heatmap {
        eps_values: grid.eps_values.clone(),
        k_values: grid.k_values.clone(),
        cells: cells.into_iter().collect::<Result<_, _>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::run_experiment;

    #[test]
    fn default_grid_has_36_cells() {
        let cfg = ExperimentConfig { rounds: 40, ..ExperimentConfig::default() };
        let grid = GridSpec { runs_per_cell: 2, ..GridSpec::default() };
        let map = grid_search(&grid, &cfg).unwrap();
        assert_eq!(map.cells.len(), 36);
        assert_eq!((map.cells[7].epsilon, map.cells[7].k), (0.2, 10));
    }

    #[test]
    fn single_cell_matches_run_experiment() {
        let cfg = ExperimentConfig { seeds: vec![5], ..ExperimentConfig::default() };
        let grid = GridSpec { eps_values: vec![0.3], k_values: vec![12], runs_per_cell: 3 };
        let map = grid_search(&grid, &cfg).unwrap();
        let direct = ExperimentConfig {
            policy: PolicyParams::T3p(T3pConfig { eps_start: 0.3, k: 12, ..T3pConfig::default() }),
            seeds: vec![5, 6, 7],
            ..cfg
        };
        let log = run_experiment(&direct).unwrap();
        let total: f64 = log.records.iter().map(|r| r.reward).sum();
        assert!((map.cells[0].mean_cumulative_reward - total / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_grid_rejected() {
        let grid = GridSpec { k_values: vec![], ..GridSpec::default() };
        assert!(grid_search(&grid, &ExperimentConfig::default()).is_err());
    }
}
