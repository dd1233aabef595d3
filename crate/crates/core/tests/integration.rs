use std::collections::BTreeMap;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use t3p_dbs::bench::{run_experiment, ExperimentConfig};
use t3p_dbs::env::{calibrate_surrogate, BgtEnv, BgtEnvConfig, Environment, Provenance, RewardBreakdown, RoundResult};
use t3p_dbs::signal::{BetaMethod, BetaPower};
use t3p_dbs::stim::{build_arm_space, ArmId, StimParams};

fn synthetic_round(arm: ArmId, reward: f64, p_beta: f64) -> RoundResult {
    RoundResult {
        arm,
        params: build_arm_space().get(arm).unwrap(),
        reward: RewardBreakdown { r1: 0.0, r2: 0.0, r3: 0.0, total: reward },
        p_beta: BetaPower { value: p_beta, band: (13.0, 35.0), method: BetaMethod::Bulk },
        observation: None,
    }
}

#[test]
fn calibrated_means_match_streaming_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut runs = BTreeMap::new();
    for id in build_arm_space().ids() {
        let n = rng.random_range(3..12);
        let rounds: Vec<RoundResult> =
            (0..n).map(|_| synthetic_round(id, rng.random_range(-0.9..0.1), rng.random_range(0.0..2.0))).collect();
        runs.insert(id, rounds);
    }
    let provenance = Provenance {
        model_version: "synthetic".into(),
        seeds: vec![77],
        rounds_per_arm: 0,
        env: BgtEnvConfig::default(),
        dbs_gain: 0.0,
        p_beta_ref: 1.0,
        note: String::new(),
    };
    let spec = calibrate_surrogate(&runs, provenance).unwrap();
    for (id, rounds) in &runs {
        let (mut mean, mut mean_p) = (0.0, 0.0);
        for (k, r) in rounds.iter().enumerate() {
            mean += (r.reward.total - mean) / (k + 1) as f64;
            mean_p += (r.p_beta.value - mean_p) / (k + 1) as f64;
        }
        assert!((spec.arm[id.0].reward_mean - mean).abs() < 1e-12);
        assert!((spec.arm[id.0].pbeta_mean - mean_p).abs() < 1e-12);
    }
}

#[test]
fn network_stimulation_lowers_beta_power() {
    let cfg = BgtEnvConfig { baseline_rounds: 2, ..BgtEnvConfig::default() };
    let base = BgtEnv::new(cfg, 3).unwrap();
    let stim = base.arm_space().find(StimParams::new(155.0, 1000.0)).unwrap();
    let off = base.clone().play(ArmId(0)).unwrap();
    let on = base.clone().play(stim).unwrap();
    assert!(on.p_beta.value < off.p_beta.value, "{} vs {}", on.p_beta.value, off.p_beta.value);
    assert_eq!(off.reward.r2, 1.0);
    assert_eq!(off.reward.r3, 0.0);
    assert!(on.reward.total > off.reward.total);
    let again = base.clone().play(stim).unwrap();
    assert_eq!(again.p_beta.value.to_bits(), on.p_beta.value.to_bits());
}

#[test]
fn t3p_late_reward_beats_warmup() {
    let cfg = ExperimentConfig { seeds: (0..30).collect(), ..ExperimentConfig::default() };
    let log = run_experiment(&cfg).unwrap();
    let mean = |lo: usize, hi: usize| {
        let xs: Vec<f64> = log.records.iter().filter(|r| (lo..=hi).contains(&r.round)).map(|r| r.reward).collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    };
    assert!(mean(60, 75) > mean(1, 31));
}

#[test]
fn cli_run_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_t3p"))
        .args(["run", "--seeds", "0..3", "--rounds", "40", "--policy", "ucb", "--format", "svg", "--out-dir"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for f in ["runlog.csv", "rewards.csv", "regret.csv", "rewards.svg", "regret.svg", "manifest.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let log = std::fs::read_to_string(out.join("runlog.csv")).unwrap();
    assert_eq!(log.lines().count(), 121);

    let bad = Command::new(env!("CARGO_BIN_EXE_t3p")).args(["run", "--policy", "nope"]).output().unwrap();
    assert!(!bad.status.success());
}
