//! Snapshot simulator for incoherently distributed sources.
//!
//! Each snapshot is
//! `x(t) = sum_k s_k(t) sum_j gamma_kj(t) a(theta_k + dtheta_kj(t), phi_k + dphi_kj(t)) + n(t)`
//! with BPSK symbols, circular Gaussian path gains of variance `sigma_gamma^2 / N_k`,
//! Gaussian angular deviations and white circular Gaussian noise.
//!
//! Randomness is drawn from counter-based substreams: symbols per `(source, t)`,
//! paths per `(source, path, t)`, noise per `t`. A source's stream key is
//! derived from its parameters, so reordering the source list changes nothing
//! but summation order.

use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};
use std::path::Path;

use faer::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::array::{AngPair, UraGeometry};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::rng::{fold, substream, StreamKind};

/// Largest accepted angular spread, radians.
pub const MAX_SPREAD: f64 = 0.2;
/// Spreads above this trigger a warning.
pub const WARN_SPREAD: f64 = 0.05;
/// Elevation clamp margin for perturbed path directions.
pub const PHI_EPS: f64 = 1e-9;

/// Ground truth for one distributed source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    pub nominal: AngPair,
    pub sigma_theta: f64,
    pub sigma_phi: f64,
    /// Path-gain variance `sigma_gamma^2`.
    pub sigma_gamma_sq: f64,
    /// Symbol power `S_k`.
    pub power: f64,
    pub n_paths: usize,
}

impl SourceParams {
    pub fn new(
        nominal: AngPair,
        sigma_theta: f64,
        sigma_phi: f64,
        sigma_gamma_sq: f64,
        power: f64,
        n_paths: usize,
    ) -> Result<Self> {
        nominal.check()?;
        for (name, s) in [("sigma_theta", sigma_theta), ("sigma_phi", sigma_phi)] {
            if !(0.0..MAX_SPREAD).contains(&s) {
                return Err(Error::Domain(format!("{name} = {s} rad outside [0, {MAX_SPREAD})")));
            }
            if s > WARN_SPREAD {
                log::warn!("{name} = {s:.4} rad is not small; the Taylor model degrades");
            }
        }
        if !(sigma_gamma_sq > 0.0) || !(power > 0.0) {
            return Err(Error::Domain("gain variance and power must be positive".into()));
        }
        if n_paths == 0 {
            return Err(Error::Domain("n_paths must be at least 1".into()));
        }
        Ok(Self { nominal, sigma_theta, sigma_phi, sigma_gamma_sq, power, n_paths })
    }

    /// Degree-valued constructor.
    pub fn from_degrees(
        theta: f64,
        phi: f64,
        sigma_theta: f64,
        sigma_phi: f64,
        sigma_gamma_sq: f64,
        power: f64,
        n_paths: usize,
    ) -> Result<Self> {
        Self::new(
            AngPair::from_degrees(theta, phi)?,
            sigma_theta.to_radians(),
            sigma_phi.to_radians(),
            sigma_gamma_sq,
            power,
            n_paths,
        )
    }

    /// Received power `S_k sigma_gamma^2`.
    pub fn received_power(&self) -> f64 {
        self.power * self.sigma_gamma_sq
    }

    fn identity(&self) -> u64 {
        fold(&[
            self.nominal.theta.to_bits(),
            self.nominal.phi.to_bits(),
            self.sigma_theta.to_bits(),
            self.sigma_phi.to_bits(),
            self.sigma_gamma_sq.to_bits(),
            self.power.to_bits(),
            self.n_paths as u64,
        ])
    }
}

/// Stream keys; identical sources are told apart by occurrence order.
fn source_keys(sources: &[SourceParams]) -> Vec<u64> {
    sources
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let id = s.identity();
            let dup = sources[..k].iter().filter(|o| o.identity() == id).count() as u64;
            fold(&[id, dup])
        })
        .collect()
}

/// Received snapshots, one column per time sample.
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    pub data: CMat,
    pub geometry: UraGeometry,
    pub seed: u64,
    pub noise_var: f64,
    /// Path directions whose elevation had to be clamped into `[eps, pi/2 - eps]`.
    pub clamp_count: usize,
}

impl SnapshotSet {
    pub fn t_count(&self) -> usize {
        self.data.ncols()
    }

    /// Multiply every snapshot by `exp(i alpha)`.
    pub fn rotate_phase(&self, alpha: f64) -> SnapshotSet {
        let r = c64::cis(alpha);
        let mut out = self.clone();
        out.data = Mat::from_fn(self.data.nrows(), self.data.ncols(), |i, j| self.data[(i, j)] * r);
        out
    }
}

/// Per-source path-sum coefficients `s_k(t) sum_j gamma_kj(t)`, recorded while simulating.
#[derive(Debug, Clone)]
pub struct SimTrace {
    pub coeffs: Vec<Vec<c64>>,
}

fn cn(rng: &mut impl Rng, var: f64) -> c64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c64::new(re * s, im * s)
}

/// Simulate `t_count` snapshots. Identical inputs give identical bits.
pub fn generate(
    g: &UraGeometry,
    sources: &[SourceParams],
    t_count: usize,
    noise_var: f64,
    seed: u64,
) -> Result<SnapshotSet> {
    generate_traced(g, sources, t_count, noise_var, seed).map(|(s, _)| s)
}

/// Like [`generate`], also returning the per-source path-sum coefficients.
pub fn generate_traced(
    g: &UraGeometry,
    sources: &[SourceParams],
    t_count: usize,
    noise_var: f64,
    seed: u64,
) -> Result<(SnapshotSet, SimTrace)> {
    if sources.is_empty() {
        return Err(Error::Argument("at least one source is required".into()));
    }
    if t_count == 0 {
        return Err(Error::Argument("snapshot count must be at least 1".into()));
    }
    if !(noise_var >= 0.0) {
        return Err(Error::Domain(format!("noise variance {noise_var} must be >= 0")));
    }
    let m = g.m();
    let (mx, my) = (g.mx(), g.my());
    let keys = source_keys(sources);
    let mut data = CMat::zeros(m, t_count);
    let mut coeffs = vec![vec![c64::new(0.0, 0.0); t_count]; sources.len()];
    let mut clamp_count = 0usize;
    let mut ax = vec![c64::new(0.0, 0.0); mx];
    let mut ay = vec![c64::new(0.0, 0.0); my];
    crate::linalg::clear_simd_state();

    for t in 0..t_count {
        for (k, src) in sources.iter().enumerate() {
            let mut sym_rng = substream(seed, StreamKind::Symbol, keys[k], t as u64);
            let amp = src.power.sqrt();
            let s = if sym_rng.random::<bool>() { amp } else { -amp };
            let gain_var = src.sigma_gamma_sq / src.n_paths as f64;
            let mut csum = c64::new(0.0, 0.0);
            for j in 0..src.n_paths {
                let mut rng = substream(seed, StreamKind::Path, fold(&[keys[k], j as u64]), t as u64);
                let gamma = cn(&mut rng, gain_var);
                let dth: f64 = StandardNormal.sample(&mut rng);
                let dph: f64 = StandardNormal.sample(&mut rng);
                let theta = src.nominal.theta + src.sigma_theta * dth;
                let mut phi = src.nominal.phi + src.sigma_phi * dph;
                if !(PHI_EPS..=FRAC_PI_2 - PHI_EPS).contains(&phi) {
                    phi = phi.clamp(PHI_EPS, FRAC_PI_2 - PHI_EPS);
                    clamp_count += 1;
                }
                let c = gamma * s;
                csum += c;
                let kx = g.u() * phi.sin();
                let (st, ct) = theta.sin_cos();
                for (ix, v) in ax.iter_mut().enumerate() {
                    *v = c64::cis(kx * ct * ix as f64) * c;
                }
                for (iy, v) in ay.iter_mut().enumerate() {
                    *v = c64::cis(kx * st * iy as f64);
                }
                let mut col = data.col_mut(t);
                for iy in 0..my {
                    for ix in 0..mx {
                        col[iy * mx + ix] += ay[iy] * ax[ix];
                    }
                }
            }
            coeffs[k][t] = csum;
        }
        if noise_var > 0.0 {
            let mut rng = substream(seed, StreamKind::Noise, 0, t as u64);
            let mut col = data.col_mut(t);
            for i in 0..m {
                col[i] += cn(&mut rng, noise_var);
            }
        }
    }
    let set = SnapshotSet { data, geometry: *g, seed, noise_var, clamp_count };
    Ok((set, SimTrace { coeffs }))
}

/// Per-source SNR in both conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport {
    /// `10 log10(S_k sigma_gamma^2 / sigma_n^2)`.
    pub db: f64,
    /// Symbol power `S_k` as quoted when gain and noise variances are unity.
    pub power: f64,
}

pub fn snr_of(sources: &[SourceParams], noise_var: f64) -> Result<Vec<SnrReport>> {
    if !(noise_var > 0.0) {
        return Err(Error::Domain("noise variance must be positive".into()));
    }
    Ok(sources
        .iter()
        .map(|s| SnrReport { db: 10.0 * (s.received_power() / noise_var).log10(), power: s.power })
        .collect())
}

const MAGIC: &[u8; 4] = b"URAS";
const VERSION: u32 = 1;

/// Raw snapshot dump read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotDump {
    pub m: usize,
    pub t: usize,
    pub seed: u64,
    pub noise_var: f64,
    pub data: CMat,
}

/// Little-endian dump: magic, version, M, T, seed, noise variance, then
/// `M*T` complex128 values column by column.
pub fn write_snapshots(x: &SnapshotSet, w: &mut impl Write) -> std::io::Result<()> {
    let (m, t) = (x.data.nrows(), x.data.ncols());
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(m as u32).to_le_bytes())?;
    w.write_all(&(t as u32).to_le_bytes())?;
    w.write_all(&x.seed.to_le_bytes())?;
    w.write_all(&x.noise_var.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * m);
    for j in 0..t {
        buf.clear();
        for i in 0..m {
            let v = x.data[(i, j)];
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_snapshots(r: &mut impl Read) -> Result<SnapshotDump> {
    let bad = |what: &str| Error::Argument(format!("snapshot dump: {what}"));
    let io = |e: std::io::Error| bad(&e.to_string());
    let mut head = [0u8; 32];
    r.read_exact(&mut head).map_err(io)?;
    if &head[..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().unwrap());
    if u32_at(4) != VERSION {
        return Err(bad("unsupported version"));
    }
    let m = u32_at(8) as usize;
    let t = u32_at(12) as usize;
    let seed = u64::from_le_bytes(head[16..24].try_into().unwrap());
    let noise_var = f64::from_le_bytes(head[24..32].try_into().unwrap());
    let mut body = vec![0u8; 16 * m * t];
    r.read_exact(&mut body).map_err(io)?;
    let f = |o: usize| f64::from_le_bytes(body[o..o + 8].try_into().unwrap());
    let data = Mat::from_fn(m, t, |i, j| {
        let o = 16 * (j * m + i);
        c64::new(f(o), f(o + 8))
    });
    Ok(SnapshotDump { m, t, seed, noise_var, data })
}

/// Write the dump to `path`, replacing any existing file atomically.
pub fn dump_snapshots(x: &SnapshotSet, path: &Path) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        write_snapshots(x, &mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
