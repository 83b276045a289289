//! How well the estimated signal subspace spans the response matrix as the array grows.

use ura_esprit::array::response_matrix;
use ura_esprit::spectral::{sample_covariance, subspace_alignment, subspace_split};
use ura_esprit::{generate, AngPair, SourceParams, UraGeometry};

fn main() -> ura_esprit::Result<()> {
    let sources = [
        SourceParams::from_degrees(10.0, 30.0, 1.0, 1.0, 1.0, 10.0, 50)?,
        SourceParams::from_degrees(50.0, 40.0, 1.0, 1.0, 1.0, 10.0, 50)?,
    ];
    let angles: Vec<AngPair> = sources.iter().map(|s| s.nominal).collect();
    for n in [4, 8, 12, 20] {
        let g = UraGeometry::square(n)?;
        let a = response_matrix(&g, &angles)?;
        let mut vals: Vec<f64> = (0..9)
            .map(|s| {
                let x = generate(&g, &sources, 500, 1.0, s)?;
                let split = subspace_split(&sample_covariance(&x)?, sources.len())?;
                subspace_alignment(split.e_s.as_ref(), a.as_ref())
            })
            .collect::<ura_esprit::Result<_>>()?;
        vals.sort_by(f64::total_cmp);
        println!("M = {:>3}: median alignment {:.5}", g.m(), vals[4]);
    }
    Ok(())
}
