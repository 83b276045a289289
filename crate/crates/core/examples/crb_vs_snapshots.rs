//! Approximate Cramer-Rao bound as the snapshot count grows.

use ura_esprit::crb::{crb, Param};
use ura_esprit::dispersion::ModelCovParams;
use ura_esprit::{SourceParams, UraGeometry};

fn main() -> ura_esprit::Result<()> {
    let g = UraGeometry::square(10)?;
    let sources = [
        SourceParams::from_degrees(10.0, 30.0, 1.0, 1.0, 1.0, 10.0, 50)?,
        SourceParams::from_degrees(50.0, 40.0, 1.0, 1.0, 1.0, 10.0, 50)?,
    ];
    let model = ModelCovParams::from_sources(&sources, 1.0)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "T", "theta", "phi", "s_theta", "s_phi");
    for t in [50, 100, 500, 1000, 5000] {
        let c = crb(&g, &model, t)?;
        let v: Vec<f64> =
            [Param::Theta, Param::Phi, Param::SigmaTheta, Param::SigmaPhi].iter().map(|&p| c.sqrt_diag(p, 0).to_degrees()).collect();
        println!("{t:>6} {:10.5} {:10.5} {:10.5} {:10.5}", v[0], v[1], v[2], v[3]);
    }
    Ok(())
}
