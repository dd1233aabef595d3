//! One second of the network model, healthy and parkinsonian, with and
//! without stimulation.

use t3p_dbs::neuro::{init_network, Condition, Region};
use t3p_dbs::signal::{error_index, region_beta_power, BetaMethod, BetaPath};
use t3p_dbs::stim::{generate_pulse_train, StimParams, DEFAULT_DT_MS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let fs = 1000.0 / DEFAULT_DT_MS;
    for (condition, arm) in [
        (Condition::Healthy, StimParams::OFF),
        (Condition::Pd, StimParams::OFF),
        (Condition::Pd, StimParams::new(155.0, 1000.0)),
        (Condition::Pd, StimParams::new(180.0, 1000.0)),
    ] {
        let mut net = init_network(condition, 10, seed)?;
        net.warm_up(2000.0, DEFAULT_DT_MS)?;
        let train = generate_pulse_train(arm, 1000.0, DEFAULT_DT_MS)?;
        let obs = net.run_round(&train, 1000.0)?;
        let pb = region_beta_power(&obs.gpi_traces, fs, BetaPath::LfpFirst, BetaMethod::Bulk)?;
        let ei = error_index(obs.region_spikes(Region::Th), &obs.smc)?;
        let gpi_rate = obs.region_spikes(Region::Gpi).iter().map(Vec::len).sum::<usize>() as f64 / 10.0;
        println!(
            "{condition:>8} {arm:>22}: GPi beta power {:.4}, error index {:.3}, GPi rate {gpi_rate:.0} Hz",
            pb.value, ei.value
        );
    }
    Ok(())
}
