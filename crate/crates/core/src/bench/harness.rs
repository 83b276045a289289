//! Seeded, schedule-independent Monte Carlo sweeps.

use faer::prelude::*;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assign::hungarian;
use super::complexity::complexity_table;
use super::config::{Estimator, ExperimentConfig, SweepAxis, SweepPoint};
use super::ParamClass;
use crate::baselines::{grid_search, pseudonoise_subspace, FnObjective, GridObjective, LocalGrid, WeightedKernelObjective};
use crate::crb::crb;
use crate::dispersion::ModelCovParams;
use crate::error::{Error, Result};
use crate::esprit::estimate;
use crate::linalg;
use crate::rng::trial_seed;
use crate::sim::{generate, SnapshotSet, SourceParams};
use crate::spectral::sample_covariance;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Replaces the config's master seed.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub sweep_axis: String,
    pub sweep_value: f64,
    pub estimator: String,
    pub param_class: String,
    pub rmse_deg: f64,
    pub trials_ok: usize,
    pub trials_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRmseRow {
    pub sweep_axis: String,
    pub sweep_value: f64,
    pub estimator: String,
    pub param_class: String,
    pub source_index: usize,
    pub rmse_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrbRow {
    pub sweep_axis: String,
    pub sweep_value: f64,
    pub param_class: String,
    pub source_index: usize,
    pub crb_sqrt_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityCsvRow {
    pub sweep_axis: String,
    pub sweep_value: f64,
    pub method: String,
    pub m: usize,
    pub t: usize,
    pub k: usize,
    pub d: u128,
    pub complexity: u128,
}

/// Median over trials of the per-trial root mean squared error across sources.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianRow {
    pub sweep_value: f64,
    pub estimator: Estimator,
    pub class: ParamClass,
    pub median_deg: f64,
}

/// Per-point diagnostics not written to the CSVs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointDiagnostics {
    pub sweep_value: f64,
    /// `(estimator, stage or reason)` for every failed trial.
    pub failures: Vec<(Estimator, String)>,
    /// Mean pseudonoise dimension chosen by the eigenvalue-fraction rule.
    pub mean_pseudonoise_dim: Option<f64>,
    pub clamp_count: usize,
    pub crb_error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub estimators: Vec<Estimator>,
    pub rmse: Vec<RmseRow>,
    pub by_source: Vec<SourceRmseRow>,
    pub crb: Vec<CrbRow>,
    pub complexity: Vec<ComplexityCsvRow>,
    pub medians: Vec<MedianRow>,
    pub diagnostics: Vec<PointDiagnostics>,
}

impl ExperimentResult {
    /// RMSE per sweep point, in sweep order.
    pub fn rmse_series(&self, e: Estimator, c: ParamClass) -> Vec<f64> {
        self.values
            .iter()
            .map(|&v| {
                self.rmse
                    .iter()
                    .find(|r| r.sweep_value == v && r.estimator == e.name() && r.param_class == c.name())
                    .map_or(f64::NAN, |r| r.rmse_deg)
            })
            .collect()
    }

    pub fn median_series(&self, e: Estimator, c: ParamClass) -> Vec<f64> {
        self.values
            .iter()
            .map(|&v| {
                self.medians
                    .iter()
                    .find(|r| r.sweep_value == v && r.estimator == e && r.class == c)
                    .map_or(f64::NAN, |r| r.median_deg)
            })
            .collect()
    }

    /// `sqrt(mean_k C_kk)` per sweep point, degrees.
    pub fn crb_series(&self, c: ParamClass) -> Vec<f64> {
        self.values
            .iter()
            .map(|&v| {
                let rows: Vec<f64> = self
                    .crb
                    .iter()
                    .filter(|r| r.sweep_value == v && r.param_class == c.name())
                    .map(|r| r.crb_sqrt_deg.powi(2))
                    .collect();
                if rows.is_empty() {
                    f64::NAN
                } else {
                    (rows.iter().sum::<f64>() / rows.len() as f64).sqrt()
                }
            })
            .collect()
    }
}

/// Errors `[dtheta, dphi, dsigma_theta, dsigma_phi]` per true source, radians.
type Errors = Vec<[f64; 4]>;

struct TrialOutcome {
    per_estimator: Vec<Option<std::result::Result<Errors, String>>>,
    pseudonoise_dim: Option<usize>,
    clamp_count: usize,
}

/// Assign estimates to truth by nominal-direction distance and return signed errors.
pub fn match_to_truth(est: &[[f64; 4]], truth: &[SourceParams]) -> Errors {
    let cost: Vec<Vec<f64>> = truth
        .iter()
        .map(|t| {
            est.iter()
                .map(|e| ((e[0] - t.nominal.theta).powi(2) + (e[1] - t.nominal.phi).powi(2)).sqrt())
                .collect()
        })
        .collect();
    let a = hungarian(&cost);
    truth
        .iter()
        .zip(&a)
        .map(|(t, &j)| {
            let e = est[j];
            [
                e[0] - t.nominal.theta,
                e[1] - t.nominal.phi,
                e[2] - t.sigma_theta,
                e[3] - t.sigma_phi,
            ]
        })
        .collect()
}

fn run_proposed(x: &SnapshotSet, truth: &[SourceParams]) -> std::result::Result<Errors, String> {
    let est = estimate(x, truth.len()).map_err(|e| e.stage().map_or_else(|| e.to_string(), |s| s.to_string()))?;
    let v: Vec<[f64; 4]> = est.sources.iter().map(|s| [s.theta, s.phi, s.sigma_theta, s.sigma_phi]).collect();
    Ok(match_to_truth(&v, truth))
}

/// One local search per true source, centered on its nominal direction.
fn search_all<O: GridObjective>(obj: &O, truth: &[SourceParams], grid: &LocalGrid) -> std::result::Result<Vec<[f64; 4]>, String> {
    truth
        .iter()
        .map(|t| {
            let sg = grid.around(t.nominal.theta, t.nominal.phi).map_err(|e| e.to_string())?;
            Ok(grid_search(obj, &sg).best)
        })
        .collect()
}

/// Grid-search baselines sharing one covariance eigendecomposition.
fn run_baselines(
    x: &SnapshotSet,
    truth: &[SourceParams],
    which: &[Estimator],
    grid: &LocalGrid,
) -> (Vec<(Estimator, std::result::Result<Errors, String>)>, Option<usize>) {
    let g = x.geometry;
    let prep = sample_covariance(x).and_then(|c| linalg::herm_eigen(c.r_hat.as_ref()));
    let eig = match prep {
        Ok(e) => e,
        Err(e) => return (which.iter().map(|&w| (w, Err(e.to_string()))).collect(), None),
    };
    let mut dim = None;
    let mut out = Vec::new();
    for &w in which {
        let weight: std::result::Result<faer::Mat<c64>, String> = match w {
            Estimator::Subspace => {
                let max = eig.values[0];
                let min = *eig.values.last().unwrap();
                if !(min > 1e-12 * max) {
                    Err("sample covariance is singular".into())
                } else {
                    let v = &eig.vectors;
                    let scaled = Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] / eig.values[j]);
                    Ok(scaled * v.adjoint())
                }
            }
            Estimator::Dispare => {
                let (e_n, d) = pseudonoise_subspace(&eig);
                log::debug!("pseudonoise dimension {d}");
                dim = Some(d);
                Ok(e_n.adjoint().to_owned())
            }
            Estimator::Proposed => continue,
        };
        let res = weight.and_then(|wm| {
            let est = if wm.nrows() == 0 {
                let flat = FnObjective(|_: [f64; 4]| 0.0);
                search_all(&flat, truth, grid)?
            } else {
                let obj = WeightedKernelObjective::new(&g, wm.as_ref()).map_err(|e| e.to_string())?;
                search_all(&obj, truth, grid)?
            };
            Ok(match_to_truth(&est, truth))
        });
        out.push((w, res));
    }
    (out, dim)
}

fn run_trial(cfg: &ExperimentConfig, seed: u64, p: &SweepPoint, trial: usize) -> TrialOutcome {
    let s = trial_seed(seed, p.index as u64, trial as u64);
    let x = match generate(&p.geometry, &p.sources, cfg.snapshots, cfg.noise_var, s) {
        Ok(x) => x,
        Err(e) => {
            let msg = e.to_string();
            return TrialOutcome {
                per_estimator: cfg.estimators.iter().map(|_| Some(Err(msg.clone()))).collect(),
                pseudonoise_dim: None,
                clamp_count: 0,
            };
        }
    };
    let baselines: Vec<Estimator> = if trial < cfg.baseline_trials() {
        cfg.estimators.iter().copied().filter(|&e| e != Estimator::Proposed).collect()
    } else {
        Vec::new()
    };
    let (mut base, dim) = if baselines.is_empty() {
        (Vec::new(), None)
    } else {
        run_baselines(&x, &p.sources, &baselines, &cfg.grid.local_grid())
    };
    let per_estimator = cfg
        .estimators
        .iter()
        .map(|&e| match e {
            Estimator::Proposed => Some(run_proposed(&x, &p.sources)),
            _ => base.iter().position(|(w, _)| *w == e).map(|i| base.swap_remove(i).1),
        })
        .collect();
    TrialOutcome { per_estimator, pseudonoise_dim: dim, clamp_count: x.clamp_count }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Run every trial of every sweep point and aggregate.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentResult> {
    cfg.validate()?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let points = cfg.points()?;
    let axis = cfg.sweep_axis();
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..cfg.trials).map(move |t| (p, t))).collect();
    let work = || -> Vec<TrialOutcome> {
        jobs.par_iter().map(|&(p, t)| run_trial(cfg, seed, &points[p], t)).collect()
    };
    let outcomes = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let axis_name = axis.name().to_string();
    let grid = cfg.grid.local_grid();
    let mut res = ExperimentResult {
        axis,
        values: points.iter().map(|p| p.value).collect(),
        estimators: cfg.estimators.clone(),
        rmse: Vec::new(),
        by_source: Vec::new(),
        crb: Vec::new(),
        complexity: Vec::new(),
        medians: Vec::new(),
        diagnostics: Vec::new(),
    };
    for (pi, p) in points.iter().enumerate() {
        let trials = &outcomes[pi * cfg.trials..(pi + 1) * cfg.trials];
        let k = p.sources.len();
        let mut diag = PointDiagnostics { sweep_value: p.value, ..Default::default() };
        diag.clamp_count = trials.iter().map(|t| t.clamp_count).sum();
        let dims: Vec<usize> = trials.iter().filter_map(|t| t.pseudonoise_dim).collect();
        if !dims.is_empty() {
            diag.mean_pseudonoise_dim = Some(dims.iter().sum::<usize>() as f64 / dims.len() as f64);
        }
        for (ei, &e) in cfg.estimators.iter().enumerate() {
            let mut ok: Vec<&Errors> = Vec::new();
            let mut failed = 0;
            for t in trials {
                match &t.per_estimator[ei] {
                    Some(Ok(errs)) => ok.push(errs),
                    Some(Err(why)) => {
                        failed += 1;
                        diag.failures.push((e, why.clone()));
                    }
                    None => {}
                }
            }
            for c in ParamClass::ALL {
                let ci = c.index();
                let n = ok.len() as f64;
                let mse = ok.iter().flat_map(|errs| errs.iter().map(|x| x[ci] * x[ci])).sum::<f64>() / (n * k as f64);
                res.rmse.push(RmseRow {
                    sweep_axis: axis_name.clone(),
                    sweep_value: p.value,
                    estimator: e.name().into(),
                    param_class: c.name().into(),
                    rmse_deg: mse.sqrt().to_degrees(),
                    trials_ok: ok.len(),
                    trials_failed: failed,
                });
                for src in 0..k {
                    let m = ok.iter().map(|errs| errs[src][ci].powi(2)).sum::<f64>() / n;
                    res.by_source.push(SourceRmseRow {
                        sweep_axis: axis_name.clone(),
                        sweep_value: p.value,
                        estimator: e.name().into(),
                        param_class: c.name().into(),
                        source_index: src,
                        rmse_deg: m.sqrt().to_degrees(),
                    });
                }
                let mut per_trial: Vec<f64> = ok
                    .iter()
                    .map(|errs| (errs.iter().map(|x| x[ci] * x[ci]).sum::<f64>() / k as f64).sqrt().to_degrees())
                    .collect();
                res.medians.push(MedianRow { sweep_value: p.value, estimator: e, class: c, median_deg: median(&mut per_trial) });
            }
        }
        if cfg.crb {
            let bound = ModelCovParams::from_sources(&p.sources, cfg.noise_var).and_then(|m| crb(&p.geometry, &m, cfg.snapshots));
            match bound {
                Ok(b) => {
                    for c in ParamClass::ALL {
                        for src in 0..k {
                            res.crb.push(CrbRow {
                                sweep_axis: axis_name.clone(),
                                sweep_value: p.value,
                                param_class: c.name().into(),
                                source_index: src,
                                crb_sqrt_deg: b.sqrt_diag(c.crb_param(), src).to_degrees(),
                            });
                        }
                    }
                }
                Err(e) => {
                    log::warn!("CRB unavailable at {} = {}: {e}", axis_name, p.value);
                    diag.crb_error = Some(e.to_string());
                }
            }
        }
        for row in complexity_table(
            p.geometry.m() as u128,
            cfg.snapshots as u128,
            k as u32,
            grid.doa_points() as u128,
            grid.spread_points() as u128,
        ) {
            res.complexity.push(ComplexityCsvRow {
                sweep_axis: axis_name.clone(),
                sweep_value: p.value,
                method: row.method.name().into(),
                m: p.geometry.m(),
                t: cfg.snapshots,
                k,
                d: row.d,
                complexity: row.count,
            });
        }
        res.diagnostics.push(diag);
    }
    Ok(res)
}
