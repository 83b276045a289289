//! Step through the estimator: subspace split, TLS rotations, eigenvalue pairing.

use ura_esprit::esprit::{match_eigenvalues, recover_doas, select_subspaces, tls_transform, PsiPair};
use ura_esprit::spectral::{sample_covariance, subspace_split};
use ura_esprit::{generate, SourceParams, UraGeometry};

fn main() -> ura_esprit::Result<()> {
    let g = UraGeometry::square(10)?;
    let sources = [
        SourceParams::from_degrees(10.0, 30.0, 1.0, 1.0, 1.0, 10.0, 50)?,
        SourceParams::from_degrees(50.0, 40.0, 1.0, 1.0, 1.0, 10.0, 50)?,
    ];
    let x = generate(&g, &sources, 500, 1.0, 3)?;
    let split = subspace_split(&sample_covariance(&x)?, sources.len())?;
    println!("noise floor estimate {:.4}", split.noise_var_hat);

    let [e1, e2, e3] = select_subspaces(split.e_s.as_ref(), &g)?;
    let psi = PsiPair { psi1: tls_transform(e1.as_ref(), e2.as_ref())?, psi2: tls_transform(e1.as_ref(), e3.as_ref())? };
    let m = match_eigenvalues(&psi)?;
    for (k, grp) in m.grouping.iter().enumerate() {
        print!("group {k}:");
        for &i in grp {
            print!("  ({:+.3}, {:+.3})", m.lambda1[i].arg(), m.lambda2[i].arg());
        }
        println!();
    }
    println!("grouping confidence {:.2}, off-diagonal energy {:.2e}", m.grouping_confidence, m.psi4_offdiag);
    for (th, ph) in recover_doas(&m, g.u()).doas {
        println!("theta {:7.3} deg  phi {:7.3} deg", th.to_degrees(), ph.to_degrees());
    }
    Ok(())
}
