use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use t3p_dbs::bench::{
    compute_regret, read_runlog_csv, regret_path, run_experiment, write_runlog_csv, ExperimentConfig,
};
use t3p_dbs::env::{compute_reward, Environment, RewardConfig, SurrogateEnv, SurrogateSpec};
use t3p_dbs::policy::{ucb_select, BanditState, Policy, PolicyParams};
use t3p_dbs::signal::{beta_power, fft_radix2, psd, BetaMethod, Window};
use t3p_dbs::stim::{generate_pulse_train, rms_current, ArmId, StimParams};

fn signal(len_log2: std::ops::Range<u32>) -> impl Strategy<Value = Vec<f64>> {
    len_log2.prop_flat_map(|k| proptest::collection::vec(-10.0f64..10.0, 1usize << k))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn parseval(x in signal(1..11)) {
        let n = x.len() as f64;
        let spec = fft_radix2(&x, 1.0).unwrap();
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = spec.bins.iter().map(|c| c.norm_sqr()).sum::<f64>() / n;
        prop_assert!((time - freq).abs() <= 1e-9 * time.max(1.0));
    }

    #[test]
    fn fft_is_linear((x, y) in (4u32..10).prop_flat_map(|k| {
        let v = proptest::collection::vec(-5.0f64..5.0, 1usize << k);
        (v.clone(), v)
    }), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (fx, fy, fz) = (fft_radix2(&x, 1.0).unwrap(), fft_radix2(&y, 1.0).unwrap(), fft_radix2(&z, 1.0).unwrap());
        for k in 0..z.len() {
            let expect: Complex64 = fx.bins[k] * a + fy.bins[k] * b;
            prop_assert!((fz.bins[k] - expect).norm() < 1e-9 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn psd_power_matches_variance(x in signal(6..12)) {
        // One-sided periodogram of a rectangular window integrates to the mean square.
        let p = psd(&x, 1000.0, Window::None).unwrap();
        let ms = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        prop_assert!(close(p.total_power(), ms, 1e-9));
    }

    #[test]
    fn beta_power_offset_and_scale(x in signal(10..14), offset in -50.0f64..50.0, c in 0.1f64..10.0) {
        let fs = 1000.0;
        let base = beta_power(&x, fs, BetaMethod::Bulk).unwrap().value;
        let shifted: Vec<f64> = x.iter().map(|v| v + offset).collect();
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        prop_assert!(base >= 0.0);
        prop_assert!(close(beta_power(&shifted, fs, BetaMethod::Bulk).unwrap().value, base, 1e-6) || base < 1e-12);
        prop_assert!(close(beta_power(&scaled, fs, BetaMethod::Bulk).unwrap().value, base * c * c, 1e-9) || base < 1e-12);
    }

    #[test]
    fn any_valid_train_is_charge_balanced(f in 1.0f64..3000.0, a in 1.0f64..6000.0) {
        let t = generate_pulse_train(StimParams::new(f, a), 1000.0, 0.01).unwrap();
        let gross: f64 = t.samples().iter().map(|s| s.abs()).sum::<f64>() * t.dt();
        prop_assert!(t.net_charge().abs() <= 1e-12 * gross.max(1.0));
        // Whole pulses only: onsets at k * period that leave room for both phases.
        let (period, width) = (1000.0 / f, 0.3);
        let x = (1000.0 - width) / period;
        let rms = |pulses: f64| a * (pulses * width / 1000.0).sqrt();
        let mut counts = vec![x.floor() + 1.0];
        // Onsets are rounded to the sample grid, so a pulse ending within a sample of the end may go either way.
        if (x - x.round()).abs() * period <= 0.01 {
            counts.push(x.round());
            counts.push(x.round() + 1.0);
        }
        prop_assert!(counts.iter().any(|&n| close(rms_current(&t), rms(n), 1e-9)));
    }

    #[test]
    fn reward_stays_in_bounds(p_beta in 0.0f64..100.0, reference in 0.01f64..10.0, i in proptest::collection::vec(prop_oneof![Just(0.0), -5000.0f64..5000.0], 0..400)) {
        let cfg = RewardConfig::default().with_p_beta_ref(reference);
        let r = compute_reward(p_beta, &i, 0.01, &cfg);
        prop_assert!((-0.9 - 1e-12..=0.1 + 1e-12).contains(&r.total));
        for part in [r.r1, r.r2, r.r3] {
            prop_assert!((0.0..=1.0).contains(&part));
        }
    }

    #[test]
    fn reward_decreases_with_beta(p in 0.0f64..0.9, dp in 0.01f64..0.1) {
        let cfg = RewardConfig::default().with_p_beta_ref(1.0);
        let lo = compute_reward(p, &[0.0; 10], 0.01, &cfg).total;
        let hi = compute_reward(p + dp, &[0.0; 10], 0.01, &cfg).total;
        prop_assert!(hi < lo);
    }

    #[test]
    fn incremental_mean_matches_two_pass(rewards in proptest::collection::vec(-1.0f64..1.0, 1..200)) {
        let mut s = BanditState::new(2);
        for &r in &rewards {
            s.record(ArmId(1), r);
        }
        let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
        prop_assert!((s.q[1] - mean).abs() < 1e-12);
        prop_assert_eq!(s.n[1], rewards.len() as u64);
    }

    #[test]
    fn ucb_ignores_common_reward_shift(
        plays in proptest::collection::vec((0usize..6, -1.0f64..1.0), 6..80),
        shift in -5.0f64..5.0,
    ) {
        let (mut a, mut b) = (BanditState::new(6), BanditState::new(6));
        for (arm, r) in plays {
            a.record(ArmId(arm), r);
            b.record(ArmId(arm), r + shift);
        }
        prop_assert_eq!(ucb_select(&a, 0.05), ucb_select(&b, 0.05));
    }

    #[test]
    fn regret_is_prefix_sum(plays in proptest::collection::vec(0usize..31, 0..120)) {
        let spec = SurrogateSpec::bundled();
        let means = spec.reward_means();
        let arms: Vec<ArmId> = plays.into_iter().map(ArmId).collect();
        let (inst, cum) = regret_path(&arms, spec.optimal_arm(), &means).unwrap();
        let mut total = 0.0;
        for (i, c) in inst.iter().zip(&cum) {
            prop_assert!(*i >= 0.0);
            total += i;
            prop_assert!((total - c).abs() < 1e-12);
        }
        prop_assert!(cum.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn surrogate_replays_identically(seed in any::<u64>(), arms in proptest::collection::vec(0usize..31, 1..50)) {
        let spec = Arc::new(SurrogateSpec::bundled());
        let mut a = SurrogateEnv::new(spec.clone(), seed);
        let mut b = SurrogateEnv::new(spec, seed);
        for arm in arms {
            let (x, y) = (a.play(ArmId(arm)).unwrap(), b.play(ArmId(arm)).unwrap());
            prop_assert_eq!(x.reward, y.reward);
            prop_assert_eq!(x.p_beta.value.to_bits(), y.p_beta.value.to_bits());
            prop_assert!((-0.9..=0.1).contains(&x.reward.total));
        }
    }

    #[test]
    fn policies_only_pick_active_arms(seed in any::<u64>(), pruned in proptest::collection::btree_set(0usize..31, 0..20)) {
        for params in [
            PolicyParams::t3p(),
            PolicyParams::epsilon_greedy(),
            PolicyParams::ucb(),
            PolicyParams::bayes_ucb(),
            PolicyParams::discounted_ucb(),
            PolicyParams::thompson(),
            PolicyParams::Random,
        ] {
            let mut p: Box<dyn Policy> = params.build(31, seed).unwrap();
            for &arm in &pruned {
                p.prune(ArmId(arm)).unwrap();
            }
            let mut env = SurrogateEnv::new(Arc::new(SurrogateSpec::bundled()), seed);
            for _ in 0..60 {
                let a = p.select();
                prop_assert!(!pruned.contains(&a.0), "{} picked pruned arm {}", params.label(), a);
                let r = env.play(a).unwrap();
                p.update(a, r.reward.total, r.p_beta.value);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn runlog_csv_round_trip(seed in any::<u64>(), rounds in 1usize..60) {
        let cfg = ExperimentConfig { seeds: vec![seed, seed.wrapping_add(1)], rounds, ..ExperimentConfig::default() };
        let log = run_experiment(&cfg).unwrap();
        prop_assert_eq!(log.records.len(), 2 * rounds);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runlog.csv");
        write_runlog_csv(&log.records, &path).unwrap();
        prop_assert_eq!(read_runlog_csv(&path).unwrap(), log.records.clone());
        let means = log.arm_means.clone().unwrap();
        let regret = compute_regret(&log.records, log.optimal_arm, &means).unwrap();
        for (rec, inst) in log.records.iter().zip(&regret.per_seed[0].instantaneous) {
            prop_assert_eq!(rec.regret, Some(*inst));
        }
    }
}
