//! File formats: JSON documents, sample CSVs with an `xi_1,...,xi_m` header
//! and `#`-prefixed manifest lines.

use std::fs;
use std::io::Write;
use std::path::Path;

use aro_core::model::{Polytope, SampleSet, UncertaintySet};
use aro_core::ScaledSet;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn json_error(path: &Path, source: serde_json::Error) -> CliError {
    CliError::Json {
        path: path.to_path_buf(),
        source,
    }
}

/// A polytope given either as `{v, d}` or as a tagged uncertainty set.
pub fn read_polytope(path: &Path) -> CliResult<Polytope> {
    let value: Value = read_json(path)?;
    if value.get("kind").is_some() {
        let set: UncertaintySet = serde_json::from_value(value).map_err(|e| json_error(path, e))?;
        Ok(set.as_polytope()?.clone())
    } else {
        serde_json::from_value(value).map_err(|e| json_error(path, e))
    }
}

/// A scaled set, either bare or nested under `result.scaled` / `scaled` as
/// written by `synthesize` and `dro`.
pub fn read_scaled_set(path: &Path) -> CliResult<ScaledSet> {
    let value: Value = read_json(path)?;
    let inner = value
        .pointer("/result/scaled")
        .or_else(|| value.get("scaled"))
        .cloned()
        .unwrap_or(value);
    serde_json::from_value(inner).map_err(|e| json_error(path, e))
}

pub fn read_samples(path: &Path) -> CliResult<SampleSet> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let width = rdr.headers().map_err(csv_err)?.len();
    let mut samples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CliError::Input(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        if row.len() != width {
            return Err(CliError::Input(format!(
                "{}: row {} has {} fields, header has {width}",
                path.display(),
                i + 1,
                row.len()
            )));
        }
        samples.push(row);
    }
    Ok(SampleSet::new(samples, None, path.display().to_string()))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// `{"manifest": ..., "result": ...}` as pretty JSON, to `out` or stdout.
pub fn emit_json<T: Serialize>(
    out: Option<&Path>,
    manifest: &RunManifest,
    result: &T,
) -> CliResult<()> {
    let doc = json!({ "manifest": manifest, "result": result });
    let mut text =
        serde_json::to_string_pretty(&doc).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    match out {
        Some(p) => write_bytes(p, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

/// CSV with the manifest as a leading `#` comment line.
pub fn write_csv(
    path: &Path,
    manifest: &RunManifest,
    header: &[String],
    rows: &[Vec<String>],
) -> CliResult<()> {
    let mut buf = Vec::new();
    let line = serde_json::to_string(manifest).map_err(|e| CliError::Input(e.to_string()))?;
    buf.extend_from_slice(format!("# manifest: {line}\n").as_bytes());
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let csv_err = |source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        };
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    write_bytes(path, &buf)
}

pub fn xi_header(m: usize) -> Vec<String> {
    (1..=m).map(|k| format!("xi_{k}")).collect()
}

pub fn fmt_row(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}
