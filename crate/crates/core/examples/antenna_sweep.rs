//! A small Monte Carlo sweep over the array size, written to CSV and SVG.

use ura_esprit::bench::{emit, run_experiment, Estimator, ExperimentConfig, ParamClass, RunOptions};

const CONFIG: &str = r#"{
    "name": "antenna sweep",
    "geometries": [[6, 6], [8, 8], [10, 10]],
    "sources": [{"theta_deg": 10, "phi_deg": 30}, {"theta_deg": 50, "phi_deg": 40}],
    "snr_db": [10],
    "snapshots": 500,
    "trials": 20,
    "seed": 5
}"#;

fn main() -> ura_esprit::Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    let res = run_experiment(&cfg, &RunOptions::default())?;
    for c in ParamClass::ALL {
        let rmse = res.rmse_series(Estimator::Proposed, c);
        let bound = res.crb_series(c);
        print!("{:>12}:", c.name());
        for (r, b) in rmse.iter().zip(&bound) {
            print!("  {r:.4} (crb {b:.4})");
        }
        println!();
    }
    let dir = std::env::temp_dir().join("ura_antenna_sweep");
    let files = emit(&res, &dir)?;
    println!("tables in {}", files.rmse.parent().unwrap().display());
    Ok(())
}
