//! Local grid searches (DISPARE and the modified subspace criterion) around the true direction.

use faer::Mat;
use ura_esprit::baselines::{grid_search, pseudonoise_subspace, LocalGrid, WeightedKernelObjective};
use ura_esprit::linalg::herm_eigen;
use ura_esprit::spectral::sample_covariance;
use ura_esprit::{generate, SourceParams, UraGeometry};

fn main() -> ura_esprit::Result<()> {
    let g = UraGeometry::square(8)?;
    let truth = SourceParams::from_degrees(10.0, 30.0, 1.0, 1.0, 1.0, 10.0, 50)?;
    let x = generate(&g, &[truth], 500, 1.0, 11)?;
    let eig = herm_eigen(sample_covariance(&x)?.r_hat.as_ref())?;
    let grid = LocalGrid::standard().around(truth.nominal.theta, truth.nominal.phi)?;

    let (e_n, dim) = pseudonoise_subspace(&eig);
    let w_n = e_n.adjoint().to_owned();
    let dispare = WeightedKernelObjective::new(&g, w_n.as_ref())?;
    let r_inv = {
        let v = &eig.vectors;
        Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] / eig.values[j]) * v.adjoint()
    };
    let subspace = WeightedKernelObjective::new(&g, r_inv.as_ref())?;

    println!("pseudonoise dimension {dim} of {}", g.m());
    for (name, r) in [("dispare", grid_search(&dispare, &grid)), ("subspace", grid_search(&subspace, &grid))] {
        let d: Vec<String> = r.best.iter().map(|v| format!("{:.2}", v.to_degrees())).collect();
        println!("{name:>9}: best [{}] deg after {} evaluations", d.join(", "), r.evaluations);
    }
    Ok(())
}
