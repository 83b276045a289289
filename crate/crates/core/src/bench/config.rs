//! JSON experiment configuration. Angles are in degrees here and nowhere else.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::array::UraGeometry;
use crate::baselines::LocalGrid;
use crate::error::{Error, Result};
use crate::sim::SourceParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Proposed,
    Dispare,
    Subspace,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Proposed => "proposed",
            Estimator::Dispare => "dispare",
            Estimator::Subspace => "subspace",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub theta_deg: f64,
    pub phi_deg: f64,
    #[serde(default = "one_deg")]
    pub sigma_theta_deg: f64,
    #[serde(default = "one_deg")]
    pub sigma_phi_deg: f64,
    #[serde(default = "unit")]
    pub gain_var: f64,
    #[serde(default = "fifty")]
    pub n_paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub doa_half_width_deg: f64,
    pub doa_step_deg: f64,
    pub spread_lo_deg: f64,
    pub spread_hi_deg: f64,
    pub spread_step_deg: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { doa_half_width_deg: 1.0, doa_step_deg: 0.2, spread_lo_deg: 0.2, spread_hi_deg: 2.0, spread_step_deg: 0.2 }
    }
}

impl GridSpec {
    pub fn local_grid(&self) -> LocalGrid {
        LocalGrid {
            doa_half_width: self.doa_half_width_deg.to_radians(),
            doa_step: self.doa_step_deg.to_radians(),
            spread_lo: self.spread_lo_deg.to_radians(),
            spread_hi: self.spread_hi_deg.to_radians(),
            spread_step: self.spread_step_deg.to_radians(),
        }
    }
}

fn one_deg() -> f64 {
    1.0
}
fn unit() -> f64 {
    1.0
}
fn fifty() -> usize {
    50
}
fn default_u() -> f64 {
    PI
}
fn default_estimators() -> Vec<Estimator> {
    vec![Estimator::Proposed]
}
fn yes() -> bool {
    true
}

/// One experiment: a sweep over at most one axis.
///
/// Per-source SNR in dB sets the symbol power `S_k = sigma_n^2 10^(snr/10) / sigma_gamma^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    /// `[Mx, My]` per sweep point.
    pub geometries: Vec<[usize; 2]>,
    #[serde(default = "default_u")]
    pub u: f64,
    pub sources: Vec<SourceSpec>,
    pub snr_db: Vec<f64>,
    /// Overrides both spreads of every source.
    #[serde(default)]
    pub spreads_deg: Option<Vec<f64>>,
    /// Use the first `K` sources.
    #[serde(default)]
    pub k_values: Option<Vec<usize>>,
    /// Overrides every source's path count.
    #[serde(default)]
    pub scatterers: Option<Vec<usize>>,
    #[serde(default = "unit")]
    pub noise_var: f64,
    pub snapshots: usize,
    pub trials: usize,
    /// Trials given to the grid-search baselines (defaults to `trials`).
    #[serde(default)]
    pub baseline_trials: Option<usize>,
    pub seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Estimator>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "yes")]
    pub crb: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    Antennas,
    SnrDb,
    SpreadDeg,
    Sources,
    Scatterers,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Antennas => "antennas",
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::SpreadDeg => "spread_deg",
            SweepAxis::Sources => "sources",
            SweepAxis::Scatterers => "scatterers",
        }
    }
}

/// Fully resolved sweep point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub geometry: UraGeometry,
    pub sources: Vec<SourceParams>,
    pub snr_db: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn baseline_trials(&self) -> usize {
        self.baseline_trials.unwrap_or(self.trials).min(self.trials)
    }

    fn axis_lengths(&self) -> [(SweepAxis, usize); 5] {
        [
            (SweepAxis::Antennas, self.geometries.len()),
            (SweepAxis::SnrDb, self.snr_db.len()),
            (SweepAxis::SpreadDeg, self.spreads_deg.as_ref().map_or(1, Vec::len)),
            (SweepAxis::Sources, self.k_values.as_ref().map_or(1, Vec::len)),
            (SweepAxis::Scatterers, self.scatterers.as_ref().map_or(1, Vec::len)),
        ]
    }

    /// The swept axis; a config with no non-singleton axis is a one-point antenna sweep.
    pub fn sweep_axis(&self) -> SweepAxis {
        self.axis_lengths()
            .iter()
            .find(|(_, n)| *n > 1)
            .map_or(SweepAxis::Antennas, |(a, _)| *a)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let lens = self.axis_lengths();
        if lens.iter().any(|(_, n)| *n == 0) {
            return bad("sweep lists must not be empty".into());
        }
        let swept: Vec<&str> = lens.iter().filter(|(_, n)| *n > 1).map(|(a, _)| a.name()).collect();
        if swept.len() > 1 {
            return bad(format!("only one sweep axis may vary, found {}", swept.join(", ")));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.snapshots == 0 {
            return bad("snapshots must be at least 1".into());
        }
        if self.sources.is_empty() {
            return bad("at least one source is required".into());
        }
        if self.estimators.is_empty() {
            return bad("no estimators selected".into());
        }
        if let Some(ks) = &self.k_values {
            if ks.iter().any(|&k| k == 0 || k > self.sources.len()) {
                return bad(format!("k_values must lie in 1..={}", self.sources.len()));
            }
        }
        if self.u > PI {
            log::warn!("u = {} exceeds pi: azimuth/elevation recovery may alias", self.u);
        }
        for p in self.points()? {
            if 3 * p.sources.len() > p.geometry.m_sub() {
                return bad(format!(
                    "{} sources need at least {} subarray elements, array {}x{} has {}",
                    p.sources.len(),
                    3 * p.sources.len(),
                    p.geometry.mx(),
                    p.geometry.my(),
                    p.geometry.m_sub()
                ));
            }
        }
        Ok(())
    }

    /// Resolve every sweep point.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let axis = self.sweep_axis();
        let n = self.axis_lengths().iter().map(|(_, n)| *n).max().unwrap_or(1);
        let pick = |v: &[f64], i: usize| if v.len() == 1 { v[0] } else { v[i] };
        (0..n)
            .map(|i| {
                let [mx, my] = if self.geometries.len() == 1 { self.geometries[0] } else { self.geometries[i] };
                let geometry = UraGeometry::new(mx, my, self.u)?;
                let snr = pick(&self.snr_db, i);
                let spread = self.spreads_deg.as_ref().map(|v| pick(v, i));
                let k = self
                    .k_values
                    .as_ref()
                    .map_or(self.sources.len(), |v| if v.len() == 1 { v[0] } else { v[i] });
                let paths = self.scatterers.as_ref().map(|v| if v.len() == 1 { v[0] } else { v[i] });
                let sources = self.sources[..k]
                    .iter()
                    .map(|s| {
                        let st = spread.unwrap_or(s.sigma_theta_deg);
                        let sp = spread.unwrap_or(s.sigma_phi_deg);
                        let power = self.noise_var * 10f64.powf(snr / 10.0) / s.gain_var;
                        SourceParams::from_degrees(s.theta_deg, s.phi_deg, st, sp, s.gain_var, power, paths.unwrap_or(s.n_paths))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let value = match axis {
                    SweepAxis::Antennas => geometry.m() as f64,
                    SweepAxis::SnrDb => snr,
                    SweepAxis::SpreadDeg => spread.unwrap_or(self.sources[0].sigma_theta_deg),
                    SweepAxis::Sources => k as f64,
                    SweepAxis::Scatterers => paths.unwrap_or(self.sources[0].n_paths) as f64,
                };
                Ok(SweepPoint { index: i, value, geometry, sources, snr_db: snr })
            })
            .collect()
    }
}
