//! Beta-band power of synthetic signals with the bulk and streaming estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use t3p_dbs::signal::{beta_power, BetaMethod, ChunkedPsd, BETA_HIGH_HZ, BETA_LOW_HZ};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fs = 100_000.0;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mix = |f: f64, rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..200_000)
            .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / fs).sin() + 0.3 * rng.random_range(-1.0..1.0))
            .collect()
    };
    for f in [8.0, 20.0, 30.0, 60.0] {
        let x = mix(f, &mut rng);
        let bulk = beta_power(&x, fs, BetaMethod::Bulk)?;
        let chunked = beta_power(&x, fs, BetaMethod::Chunked(1 << 14))?;
        println!("{f:>5} Hz tone: beta power bulk {:.4}, chunked {:.4}", bulk.value, chunked.value);
    }

    let x = mix(20.0, &mut rng);
    let mut stream = ChunkedPsd::new(1 << 14, fs)?;
    for block in x.chunks(1000) {
        stream.push(block);
    }
    let psd = stream.finish()?;
    println!(
        "streamed {} segments, working set {:?}, band {BETA_LOW_HZ}-{BETA_HIGH_HZ} Hz power {:.4}",
        stream.segments(),
        stream.working_set(),
        psd.band_power(BETA_LOW_HZ, BETA_HIGH_HZ)
    );
    Ok(())
}
