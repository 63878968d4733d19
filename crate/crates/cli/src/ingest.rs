//! CSV reading and writing of datasets.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use univinf_core::capacity::OutcomeSpace;
use univinf_core::inference::{CovariateKind, Dataset, Observation};

use crate::error::{CliError, CliResult};

/// Column layout of a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub outcome_column: String,
    /// Covariate columns in model order; every other column when `None`.
    pub covariate_columns: Option<Vec<String>>,
    pub covariate_kind: CovariateKind,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            outcome_column: "y".into(),
            covariate_columns: None,
            covariate_kind: CovariateKind::Discrete,
        }
    }
}

/// Reads a dataset; outcome labels must match the outcome space exactly.
pub fn ingest_csv(path: &Path, schema: &Schema, space: &OutcomeSpace) -> CliResult<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    read_dataset(file, schema, space).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn read_dataset<R: Read>(reader: R, schema: &Schema, space: &OutcomeSpace) -> CliResult<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("cannot read header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(CliError::Data("empty file".into()));
    }
    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(CliError::Data(format!("duplicate header column `{h}`")));
        }
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("missing column `{name}`")))
    };
    let y_col = column(&schema.outcome_column)?;
    let x_cols: Vec<usize> = match &schema.covariate_columns {
        Some(names) => names.iter().map(|n| column(n)).collect::<CliResult<_>>()?,
        None => (0..headers.len()).filter(|&j| j != y_col).collect(),
    };
    let mut obs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        // Row numbers count the header as row 1.
        let row = i + 2;
        let rec = rec.map_err(|e| CliError::Data(format!("row {row}: {e}")))?;
        let label = rec[y_col].trim();
        let y = space
            .index_of(label)
            .ok_or_else(|| CliError::Data(format!("row {row}: unknown outcome label `{label}`")))?;
        let x = x_cols
            .iter()
            .map(|&j| {
                let v = rec[j].trim();
                v.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Data(format!("row {row}: column `{}` is not a finite number: `{v}`", headers[j])))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        obs.push(Observation { y, x });
    }
    if obs.is_empty() {
        return Err(CliError::Data("no data rows".into()));
    }
    Dataset::new(space.cardinality(), obs, schema.covariate_kind).map_err(|e| CliError::Data(e.to_string()))
}

/// Writes `data` with header `y, x1, x2, ...` (or the given covariate names).
pub fn write_dataset<W: Write>(writer: W, data: &Dataset, space: &OutcomeSpace, covariate_names: Option<&[String]>) -> CliResult<()> {
    let k = data.covariate_dim();
    let names: Vec<String> = match covariate_names {
        Some(n) if n.len() == k => n.to_vec(),
        Some(_) => return Err(CliError::Data("covariate names do not match the covariate dimension".into())),
        None => (1..=k).map(|j| format!("x{j}")).collect(),
    };
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["y".to_string()];
    header.extend(names);
    w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for o in data.observations() {
        let mut rec = vec![space.label(o.y).to_string()];
        rec.extend(o.x.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, data: &Dataset, space: &OutcomeSpace) -> CliResult<()> {
    let file = std::fs::File::create(path)?;
    write_dataset(file, data, space, None)
}
