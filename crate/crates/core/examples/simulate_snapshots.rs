//! Generate snapshots for spread sources and compare the empirical power with the model.

use ura_esprit::sim::snr_of;
use ura_esprit::spectral::sample_covariance;
use ura_esprit::{generate, SourceParams, UraGeometry};

fn main() -> ura_esprit::Result<()> {
    let g = UraGeometry::square(10)?;
    let sources = [
        SourceParams::from_degrees(10.0, 30.0, 1.0, 1.0, 1.0, 0.2, 50)?,
        SourceParams::from_degrees(50.0, 40.0, 1.0, 1.0, 1.0, 0.2, 50)?,
    ];
    let x = generate(&g, &sources, 500, 1.0, 42)?;
    let r = sample_covariance(&x)?;
    let mean_power = (0..g.m()).map(|i| r.r_hat[(i, i)].re).sum::<f64>() / g.m() as f64;
    let expected: f64 = 1.0 + sources.iter().map(|s| s.received_power()).sum::<f64>();
    println!("snapshots {}x{}, seed {}", x.data.nrows(), x.t_count(), x.seed);
    println!("mean element power {mean_power:.4} (expected {expected:.4})");
    for (k, s) in snr_of(&sources, 1.0)?.iter().enumerate() {
        println!("source {k}: S*var/noise = {:.3} ({:.2} dB)", s.power, s.db);
    }
    println!("elevation clamps: {}", x.clamp_count);
    Ok(())
}
