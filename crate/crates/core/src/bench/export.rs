use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{BenchError, Heatmap, RegretSeries, RoundStat, RunRecord};

/// A per-round series with the label it is exported under.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub label: String,
    pub points: Vec<RoundStat>,
}

fn create(path: &Path) -> Result<csv::Writer<File>, BenchError> {
    let file = File::create(path).map_err(|e| BenchError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish<W: Write>(mut w: csv::Writer<W>, path: &Path) -> Result<(), BenchError> {
    w.flush().map_err(|e| BenchError::io(path, e))
}

/// Header plus one row per record, in log order.
pub fn write_runlog_csv(records: &[RunRecord], path: impl AsRef<Path>) -> Result<(), BenchError> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(File::create(path).map_err(|e| BenchError::io(path, e))?);
    w.write_record([
        "seed",
        "round",
        "arm",
        "frequency",
        "amplitude",
        "epsilon",
        "phase",
        "r1",
        "r2",
        "r3",
        "reward",
        "p_beta",
        "regret",
        "greedy",
    ])?;
    for r in records {
        w.serialize(r)?;
    }
    finish(w, path)
}

pub fn read_runlog_csv(path: impl AsRef<Path>) -> Result<Vec<RunRecord>, BenchError> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)?;
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

#[derive(Serialize)]
struct RewardRow<'a> {
    policy: &'a str,
    round: usize,
    mean_reward: f64,
    std_reward: f64,
}

/// Long format: one row per (series, round).
pub fn write_rewards_csv(series: &[LabeledSeries], path: impl AsRef<Path>) -> Result<(), BenchError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    if series.iter().all(|s| s.points.is_empty()) {
        w.write_record(["policy", "round", "mean_reward", "std_reward"])?;
    }
    for s in series {
        for p in &s.points {
            w.serialize(RewardRow { policy: &s.label, round: p.round, mean_reward: p.mean, std_reward: p.std })?;
        }
    }
    finish(w, path)
}

#[derive(Serialize)]
struct RegretRow<'a> {
    policy: &'a str,
    round: usize,
    mean_instantaneous: f64,
    std_instantaneous: f64,
    mean_cumulative: f64,
    std_cumulative: f64,
}

pub fn write_regret_csv(series: &[(String, RegretSeries)], path: impl AsRef<Path>) -> Result<(), BenchError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    if series.iter().all(|(_, s)| s.cumulative.is_empty()) {
        w.write_record([
            "policy",
            "round",
            "mean_instantaneous",
            "std_instantaneous",
            "mean_cumulative",
            "std_cumulative",
        ])?;
    }
    for (label, s) in series {
        for (i, c) in s.instantaneous.iter().zip(&s.cumulative) {
            w.serialize(RegretRow {
                policy: label,
                round: i.round,
                mean_instantaneous: i.mean,
                std_instantaneous: i.std,
                mean_cumulative: c.mean,
                std_cumulative: c.std,
            })?;
        }
    }
    finish(w, path)
}

pub fn write_heatmap_csv(map: &Heatmap, path: impl AsRef<Path>) -> Result<(), BenchError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    if map.cells.is_empty() {
        w.write_record(["epsilon", "k", "mean_cumulative_reward", "std_cumulative_reward", "runs"])?;
    }
    for c in &map.cells {
        w.serialize(c)?;
    }
    finish(w, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::Phase;

    fn record(seed: u64, round: usize) -> RunRecord {
        RunRecord {
            seed,
            round,
            arm: round % 31,
            frequency: 155.0,
            amplitude: 1000.0,
            epsilon: round.is_multiple_of(2).then_some(0.1 + round as f64 * 1e-3),
            phase: Phase::Run,
            r1: 0.1 / 3.0,
            r2: 0.9535,
            r3: 0.18587,
            reward: -0.05 - 1e-17 * round as f64,
            p_beta: 1.234_567_890_123_456_7e-3,
            regret: Some(std::f64::consts::PI),
            greedy: 3,
        }
    }

    #[test]
    fn runlog_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runlog.csv");
        let recs: Vec<RunRecord> = (0..10).flat_map(|s| (1..=75).map(move |r| record(s, r))).collect();
        write_runlog_csv(&recs, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 751);
        assert!(text.ends_with('\n'));
        assert_eq!(read_runlog_csv(&path).unwrap(), recs);
    }

    #[test]
    fn empty_outputs_have_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("runlog.csv");
        write_runlog_csv(&[], &log).unwrap();
        assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 1);
        let rewards = dir.path().join("rewards.csv");
        write_rewards_csv(&[LabeledSeries { label: "t3p".into(), points: vec![] }], &rewards).unwrap();
        assert_eq!(std::fs::read_to_string(&rewards).unwrap(), "policy,round,mean_reward,std_reward\n");
    }
}
