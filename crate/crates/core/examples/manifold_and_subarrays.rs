//! Array manifold, the three shifted subarrays, and the rotation `A_q = A_1 Phi_q`.

use ura_esprit::array::{phi_matrix, response_matrix, selection};
use ura_esprit::{AngPair, UraGeometry};

fn main() -> ura_esprit::Result<()> {
    let g = UraGeometry::new(6, 5, std::f64::consts::PI)?;
    let angles = [AngPair::from_degrees(10.0, 30.0)?, AngPair::from_degrees(50.0, 40.0)?];
    let a = response_matrix(&g, &angles)?;
    println!("array {}x{}: M = {}, subarray size {}", g.mx(), g.my(), g.m(), g.m_sub());
    println!("response matrix is {}x{}", a.nrows(), a.ncols());
    for (j, col) in ["a", "a", "da/dtheta", "da/dtheta", "da/dphi", "da/dphi"].iter().enumerate() {
        println!("  column {j} ({col}) norm {:.4}", a.col(j).norm_l2());
    }

    let a1 = selection(&g, 1)?.apply(a.as_ref());
    for q in [2u8, 3] {
        let aq = selection(&g, q)?.apply(a.as_ref());
        let phi = phi_matrix(&g, &angles, q)?;
        let resid = (&aq - &a1 * &phi).norm_max();
        println!("subarray {q}: max |A_q - A_1 Phi| = {resid:.2e}");
    }
    Ok(())
}
