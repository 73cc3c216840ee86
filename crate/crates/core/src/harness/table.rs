use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::OutputFormat;
use crate::error::{Error, Result};
use crate::C64;

/// CSV column order.
pub const CSV_HEADER: [&str; 15] = [
    "domain",
    "scheme",
    "N_H",
    "N_w",
    "levels",
    "dof_H",
    "dof_w",
    "dof_h",
    "j",
    "lambda_re",
    "lambda_im",
    "t_step1",
    "t_step2",
    "t_step3",
    "t_total",
];

/// One reported eigenvalue. Rows whose computation could not proceed carry no
/// eigenvalue and a note explaining why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub domain: String,
    pub scheme: String,
    #[serde(rename = "N_H")]
    pub n_coarse: usize,
    #[serde(rename = "N_w")]
    pub n_fine: Option<usize>,
    pub levels: Option<usize>,
    #[serde(rename = "dof_H")]
    pub dof_coarse: usize,
    #[serde(rename = "dof_w")]
    pub dof_fine: Option<usize>,
    #[serde(rename = "dof_h")]
    pub dof_local: Option<usize>,
    pub j: usize,
    pub lambda_re: Option<f64>,
    pub lambda_im: Option<f64>,
    pub t_step1: f64,
    pub t_step2: f64,
    pub t_step3: f64,
    pub t_total: f64,
    #[serde(skip)]
    pub note: Option<String>,
}

impl ResultRow {
    pub fn lambda(&self) -> Option<C64> {
        Some(C64::new(self.lambda_re?, self.lambda_im?))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn extend(&mut self, other: ResultTable) {
        self.rows.extend(other.rows);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(CSV_HEADER).map_err(csv_error)?;
        for row in &self.rows {
            w.serialize(row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.rows).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_json(text: &str) -> Result<Self> {
        let rows = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Self { rows })
    }

    pub fn read_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows = r
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_error)?;
        Ok(Self { rows })
    }

    pub fn write<W: Write>(&self, format: OutputFormat, out: W) -> Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }
}

/// Writes `table` to `path` in `format`.
pub fn emit(table: &ResultTable, format: OutputFormat, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    let mut out = std::io::BufWriter::new(file);
    table.write(format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}
