//! CSV and SVG output. Every file is written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::harness::ExperimentResult;
use super::plot::{write_log_plot, Series};
use super::ParamClass;
use crate::error::{Error, Result};

pub const RMSE_HEADER: &[&str] =
    &["sweep_axis", "sweep_value", "estimator", "param_class", "rmse_deg", "trials_ok", "trials_failed"];
pub const SOURCE_HEADER: &[&str] =
    &["sweep_axis", "sweep_value", "estimator", "param_class", "source_index", "rmse_deg"];
pub const CRB_HEADER: &[&str] = &["sweep_axis", "sweep_value", "param_class", "source_index", "crb_sqrt_deg"];
pub const COMPLEXITY_HEADER: &[&str] = &["sweep_axis", "sweep_value", "method", "m", "t", "k", "d", "complexity"];

/// Write `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Serialize rows under an explicit header, so an empty table still has one.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::Csv { path: path.to_path_buf(), source: e };
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.serialize(r).map_err(wrap)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let wrap = |e: csv::Error| Error::Csv { path: path.to_path_buf(), source: e };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    r.deserialize().collect::<std::result::Result<Vec<T>, _>>().map_err(wrap)
}

/// Paths written by [`emit`].
#[derive(Debug, Clone)]
pub struct Emitted {
    pub rmse: PathBuf,
    pub by_source: PathBuf,
    pub crb: PathBuf,
    pub complexity: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Write the CSV tables and one plot per parameter class into `dir`.
pub fn emit(res: &ExperimentResult, dir: &Path) -> Result<Emitted> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let out = Emitted {
        rmse: dir.join("rmse.csv"),
        by_source: dir.join("rmse_by_source.csv"),
        crb: dir.join("crb.csv"),
        complexity: dir.join("complexity.csv"),
        plots: ParamClass::ALL.iter().map(|c| dir.join(format!("rmse_{}.svg", c.name()))).collect(),
    };
    write_csv(&out.rmse, RMSE_HEADER, &res.rmse)?;
    write_csv(&out.by_source, SOURCE_HEADER, &res.by_source)?;
    write_csv(&out.crb, CRB_HEADER, &res.crb)?;
    write_csv(&out.complexity, COMPLEXITY_HEADER, &res.complexity)?;
    for (c, path) in ParamClass::ALL.iter().zip(&out.plots) {
        let mut series: Vec<Series> = res
            .estimators
            .iter()
            .map(|&e| Series { label: e.name().to_string(), x: res.values.clone(), y: res.rmse_series(e, *c) })
            .collect();
        if !res.crb.is_empty() {
            series.push(Series { label: "sqrt(CRB)".into(), x: res.values.clone(), y: res.crb_series(*c) });
        }
        let title = format!("RMSE of {}", c.name());
        write_log_plot(path, &title, res.axis.name(), "degrees", &series)?;
    }
    Ok(out)
}
