//! Simulate two spread sources on a 10x10 array and recover direction and spread.

use ura_esprit::{estimate, generate, SourceParams, UraGeometry};

fn main() -> ura_esprit::Result<()> {
    let g = UraGeometry::square(10)?;
    let sources = [
        SourceParams::from_degrees(30.0, 20.0, 1.0, 1.0, 1.0, 10.0, 50)?,
        SourceParams::from_degrees(120.0, 40.0, 1.0, 1.0, 1.0, 10.0, 50)?,
    ];
    let x = generate(&g, &sources, 200, 1.0, 7)?;
    let est = estimate(&x, sources.len())?;

    println!("{:>8} {:>8} {:>8} {:>8}", "theta", "phi", "s_theta", "s_phi");
    for s in &est.sources {
        println!(
            "{:8.3} {:8.3} {:8.3} {:8.3}",
            s.theta.to_degrees(),
            s.phi.to_degrees(),
            s.sigma_theta.to_degrees(),
            s.sigma_phi.to_degrees()
        );
    }
    println!("noise variance estimate {:.4}", est.noise_var_hat);
    println!("grouping confidence {:.2}", est.diagnostics.grouping_confidence);
    Ok(())
}
