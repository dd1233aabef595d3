use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use t3p_dbs::bench::{
    compute_regret, grid_search, heatmap_svg, intervention_run, line_chart_svg, reward_by_round, run_experiment,
    write_heatmap_csv, write_regret_csv, write_rewards_csv, write_runlog_csv, write_svg, EnvSpec, ExperimentConfig,
    GridSpec, Intervention, LabeledSeries, OutputFormat, RunLog,
};
use t3p_dbs::env::{calibrate_from_bgt, BgtEnvConfig, CalibrationConfig};
use t3p_dbs::neuro::{Condition, ModelParams};
use t3p_dbs::policy::PolicyParams;

#[derive(Parser)]
#[command(name = "t3p", version, about = "Closed-loop DBS bandit experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one policy and write its log, reward and regret tables.
    Run(Common),
    /// Run several policies on the same seeds.
    Compare(Common),
    /// T3P over an ε × K grid.
    Grid {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ε values.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// Comma-separated K values.
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        /// Runs per cell.
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Prune the optimal arm mid-run and report re-convergence.
    Intervene {
        #[command(flatten)]
        common: Common,
        /// Round after which the arm is pruned.
        #[arg(long, default_value_t = 75)]
        at: usize,
    },
    /// Build a surrogate table from the network model.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Model parameter file.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = "pd")]
        condition: String,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seeds as `a..b`, a comma list, or a count N meaning 0..N.
    #[arg(long)]
    seeds: Option<String>,
    /// Rounds per run (rounds per arm for `calibrate`).
    #[arg(long)]
    rounds: Option<usize>,
    /// `surrogate`, `surrogate:<spec.toml>` or `bgt`.
    #[arg(long)]
    env: Option<String>,
    /// Policy label; `compare` takes a comma-separated list.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// `svg` writes charts next to the CSV tables.
    #[arg(long)]
    format: Option<String>,
}

const ALL_POLICIES: &str = "t3p,epsilon_greedy,ucb,bayes_ucb,discounted_ucb,thompson,random";

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        return Ok((a..b).collect());
    }
    if s.contains(',') {
        return s.split(',').map(|x| Ok(x.trim().parse()?)).collect();
    }
    Ok((0..s.trim().parse::<u64>()?).collect())
}

fn parse_policy(label: &str) -> Result<PolicyParams> {
    PolicyParams::from_label(label.trim()).with_context(|| format!("unknown policy `{label}`"))
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = &self.seeds {
            cfg.seeds = parse_seeds(s)?;
        }
        if let Some(r) = self.rounds {
            cfg.rounds = r;
        }
        if let Some(e) = &self.env {
            cfg.environment = match e.split_once(':') {
                Some(("surrogate", path)) => EnvSpec::Surrogate { spec: Some(path.into()) },
                None if e == "surrogate" => EnvSpec::Surrogate { spec: None },
                None if e == "bgt" => EnvSpec::Bgt {
                    params: None,
                    network: BgtEnvConfig {
                        round_ms: cfg.round_length_ms,
                        dt_ms: cfg.dt_ms,
                        ..BgtEnvConfig::default()
                    },
                },
                _ => bail!("unknown environment `{e}`"),
            };
        }
        if let Some(p) = &self.policy {
            if !p.contains(',') {
                cfg.policy = parse_policy(p)?;
            }
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.clone();
        }
        if let Some(f) = &self.format {
            cfg.format = match f.as_str() {
                "csv" => OutputFormat::Csv,
                "svg" => OutputFormat::Svg,
                _ => bail!("format must be csv or svg"),
            };
        }
        Ok(cfg)
    }
}

fn out_dir(cfg: &ExperimentConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    Ok(&cfg.out_dir)
}

fn write_manifest(dir: &Path, cfg: &ExperimentConfig, logs: &[(&str, &RunLog)]) -> Result<()> {
    let runs: Vec<_> = logs
        .iter()
        .map(|(label, log)| {
            serde_json::json!({
                "policy": label,
                "fingerprint": log.fingerprint,
                "optimal_arm": log.optimal_arm.0,
                "records": log.records.len(),
            })
        })
        .collect();
    let manifest = serde_json::json!({
        "code_version": env!("CARGO_PKG_VERSION"),
        "config_fingerprint": cfg.fingerprint(),
        "config": cfg,
        "runs": runs,
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).with_context(|| path.display().to_string())?;
    Ok(())
}

fn export_runs(cfg: &ExperimentConfig, runs: &[(String, RunLog)]) -> Result<()> {
    let dir = out_dir(cfg)?;
    let rewards: Vec<LabeledSeries> =
        runs.iter().map(|(l, log)| LabeledSeries { label: l.clone(), points: reward_by_round(&log.records) }).collect();
    write_rewards_csv(&rewards, dir.join("rewards.csv"))?;
    let mut regrets = Vec::new();
    for (label, log) in runs {
        if let Some(means) = &log.arm_means {
            regrets.push((label.clone(), compute_regret(&log.records, log.optimal_arm, means)?));
        }
    }
    if !regrets.is_empty() {
        write_regret_csv(&regrets, dir.join("regret.csv"))?;
    }
    let all: Vec<_> = runs.iter().flat_map(|(_, l)| l.records.iter().cloned()).collect();
    write_runlog_csv(&all, dir.join("runlog.csv"))?;
    write_manifest(dir, cfg, &runs.iter().map(|(l, r)| (l.as_str(), r)).collect::<Vec<_>>())?;
    if cfg.format == OutputFormat::Svg {
        write_svg(&line_chart_svg(&rewards, "Mean instantaneous reward", "round", "reward"), dir.join("rewards.svg"))?;
        if !regrets.is_empty() {
            let cum: Vec<LabeledSeries> =
                regrets.iter().map(|(l, s)| LabeledSeries { label: l.clone(), points: s.cumulative.clone() }).collect();
            write_svg(&line_chart_svg(&cum, "Cumulative regret", "round", "regret"), dir.join("regret.svg"))?;
        }
    }
    for (label, log) in runs {
        let tail = cfg.rounds.saturating_sub(15).max(1);
        let late: Vec<f64> = log.records.iter().filter(|r| r.round > tail).map(|r| r.reward).collect();
        let mean = late.iter().sum::<f64>() / late.len().max(1) as f64;
        let regret = regrets.iter().find(|(l, _)| l == label).map(|(_, s)| s.final_mean());
        match regret {
            Some(r) => println!("{label:>16}  mean reward (last 15) {mean:+.4}  cumulative regret {r:.3}"),
            None => println!("{label:>16}  mean reward (last 15) {mean:+.4}"),
        }
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run(common) => {
            let cfg = common.config()?;
            let log = run_experiment(&cfg)?;
            export_runs(&cfg, &[(cfg.policy.label().to_string(), log)])
        }
        Cmd::Compare(common) => {
            let base = common.config()?;
            let labels = common.policy.clone().unwrap_or_else(|| ALL_POLICIES.into());
            let mut runs = Vec::new();
            for label in labels.split(',') {
                let cfg = ExperimentConfig { policy: parse_policy(label)?, ..base.clone() };
                runs.push((cfg.policy.label().to_string(), run_experiment(&cfg)?));
            }
            export_runs(&base, &runs)
        }
        Cmd::Grid { common, eps, k, runs } => {
            let cfg = common.config()?;
            let mut grid = GridSpec::default();
            if let Some(e) = eps {
                grid.eps_values = e;
            }
            if let Some(k) = k {
                grid.k_values = k;
            }
            if let Some(r) = runs {
                grid.runs_per_cell = r;
            }
            let map = grid_search(&grid, &cfg)?;
            let dir = out_dir(&cfg)?;
            write_heatmap_csv(&map, dir.join("heatmap.csv"))?;
            if cfg.format == OutputFormat::Svg {
                write_svg(&heatmap_svg(&map, "Mean cumulative reward"), dir.join("heatmap.svg"))?;
            }
            let best = map.best();
            println!("best cell: epsilon {} K {} ({:.3})", best.epsilon, best.k, best.mean_cumulative_reward);
            println!("wrote {}", dir.display());
            Ok(())
        }
        Cmd::Intervene { common, at } => {
            let mut cfg = common.config()?;
            if common.rounds.is_none() && common.config.is_none() {
                cfg.rounds = 130;
            }
            if cfg.interventions.is_empty() {
                cfg.interventions.push(Intervention { round: at, arm: None });
            }
            let (log, report) = intervention_run(&cfg)?;
            let dir = out_dir(&cfg)?;
            std::fs::write(dir.join("intervention.json"), serde_json::to_string_pretty(&report)?)?;
            println!(
                "pruned arm {} after round {}; second best is arm {}",
                report.pruned, report.event_round, report.second_best
            );
            for s in &report.seeds {
                match s.stable_from {
                    Some(r) => println!("  seed {:>3}: stable from round {r}", s.seed),
                    None => println!("  seed {:>3}: not stable", s.seed),
                }
            }
            export_runs(&cfg, &[(cfg.policy.label().to_string(), log)])
        }
        Cmd::Calibrate { common, params, condition } => {
            let base = common.config()?;
            let condition = match condition.as_str() {
                "pd" => Condition::Pd,
                "healthy" => Condition::Healthy,
                _ => bail!("condition must be pd or healthy"),
            };
            let mut cfg = CalibrationConfig::default();
            if common.seeds.is_some() {
                cfg.seeds = base.seeds.clone();
            }
            if let Some(r) = common.rounds {
                cfg.rounds_per_arm = r;
            }
            cfg.env = BgtEnvConfig {
                condition,
                round_ms: base.round_length_ms,
                dt_ms: base.dt_ms,
                ..BgtEnvConfig::default()
            };
            if let Some(p) = params {
                cfg.params = Some(ModelParams::load(&p)?.into());
            }
            let mut spec = calibrate_from_bgt(&cfg)?;
            spec.provenance.note = "generated by `t3p calibrate`".into();
            let dir = out_dir(&base)?;
            let path = dir.join("surrogate.toml");
            spec.save(&path)?;
            for id in spec.ranking().into_iter().take(5) {
                let a = spec.arm[id.0];
                println!(
                    "{:>5} Hz {:>5}  reward {:+.4} ± {:.4}",
                    a.frequency, a.amplitude, a.reward_mean, a.reward_std
                );
            }
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}
