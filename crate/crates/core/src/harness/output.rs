use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use super::studies::{Fit, StudyResult};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = ["study", "N", "metric", "location", "value", "seconds"];

#[derive(Serialize)]
struct Manifest<'a> {
    study: &'a str,
    version: &'a str,
    rows: usize,
    failures: usize,
    fits: &'a [Fit],
    config: &'a RunConfig,
}

/// Write `<dir>/<name>.csv` and `<dir>/<name>.manifest.json`.  Output depends
/// only on the result, so reruns with the same config are byte-identical.
pub fn emit_csv(res: &StudyResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let csv_path = dir.join(format!("{}.csv", res.name));
    let csv_err = |source| Error::Csv {
        path: csv_path.clone(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&csv_path)
        .map_err(csv_err)?;
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in &res.rows {
        let seconds = r.seconds.map(|s| format!("{s:.6}")).unwrap_or_default();
        w.write_record([
            r.study.as_str(),
            &r.order.to_string(),
            &r.metric,
            &r.location,
            &format!("{:e}", r.value),
            &seconds,
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: csv_path.clone(),
        source,
    })?;

    let manifest_path = dir.join(format!("{}.manifest.json", res.name));
    let manifest = Manifest {
        study: &res.name,
        version: env!("CARGO_PKG_VERSION"),
        rows: res.rows.len(),
        failures: res.failures,
        fits: &res.fits,
        config: &res.config,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&manifest_path, text).map_err(|source| Error::Io {
        path: manifest_path.clone(),
        source,
    })?;
    Ok((csv_path, manifest_path))
}
