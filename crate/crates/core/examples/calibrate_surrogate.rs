//! Builds a small surrogate table from the network model. The bundled
//! table uses ten seeds and four rounds per arm; this one is much cheaper.

use t3p_dbs::env::{calibrate_from_bgt, CalibrationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = CalibrationConfig { seeds: vec![0], rounds_per_arm: 3, ..CalibrationConfig::default() };
    let spec = calibrate_from_bgt(&cfg)?;
    for id in spec.ranking() {
        let a = spec.arm[id.0];
        println!(
            "{:>22}: reward {:+.4} ± {:.4}, beta power {:.4}",
            a.params(),
            a.reward_mean,
            a.reward_std,
            a.pbeta_mean
        );
    }
    let path = std::env::temp_dir().join("surrogate.toml");
    spec.save(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
