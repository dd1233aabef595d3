//! Synthesizes a few stimulation trains and prints their RMS current and charge.

use t3p_dbs::stim::{build_arm_space, generate_pulse_train, rms_current, StimParams, DEFAULT_DT_MS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for params in [StimParams::new(130.0, 2500.0), StimParams::new(155.0, 1000.0), StimParams::new(180.0, 5000.0)] {
        let train = generate_pulse_train(params, 1000.0, DEFAULT_DT_MS)?;
        println!(
            "{params:>24}: {} samples, rms {:.1} (ideal {:.1}), net charge {}",
            train.samples().len(),
            rms_current(&train),
            params.ideal_rms(),
            train.net_charge()
        );
    }
    let space = build_arm_space();
    let max = space.arms().iter().map(|a| a.ideal_rms()).fold(0.0, f64::max);
    println!("{} arms, largest ideal rms {max:.1}", space.len());
    Ok(())
}
