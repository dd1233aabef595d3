//! Experiment harness: closed-loop runs, regret, grid search, interventions
//! and CSV/SVG export.

mod config;
mod export;
mod grid;
mod intervention;
mod regret;
mod run;
mod svg;

use thiserror::Error;

use crate::env::EnvError;
use crate::neuro::NeuroError;
use crate::policy::PolicyError;
use crate::stim::ArmId;

pub use config::{EnvSpec, ExperimentConfig, Intervention, OutputFormat, DEFAULT_OPTIMAL_ARM};
pub use export::{
    read_runlog_csv, write_heatmap_csv, write_regret_csv, write_rewards_csv, write_runlog_csv, LabeledSeries,
};
pub use grid::{grid_search, GridCell, GridSpec, Heatmap};
pub use intervention::{intervention_run, InterventionReport, SeedConvergence, STABLE_RUN};
pub use regret::{compute_regret, regret_path, reward_by_round, RegretSeries, RoundStat, SeedRegret};
pub use run::{run_experiment, PreparedEnv, RunLog, RunRecord};
pub use svg::{heatmap_svg, line_chart_svg, write_svg};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("arm {0} is not in the arm space")]
    UnknownArm(ArmId),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Neuro(#[from] NeuroError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        BenchError::Io { path: path.display().to_string(), source }
    }
}
