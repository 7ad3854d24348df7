//! CSV and JSON serialization of campaign results.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::campaign::{CampaignResult, CellResult};

/// CSV column order.
pub const CSV_COLUMNS: [&str; 11] = [
    "policy",
    "snr_db",
    "t_coh_ms",
    "q_bits",
    "K",
    "mean_throughput",
    "stderr_throughput",
    "mean_m_bs",
    "mean_omega",
    "mean_gcmd",
    "n",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid(format!("unknown format '{other}'"))),
        }
    }
}

pub fn write_csv<W: Write>(cells: &[CellResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for c in cells {
        w.write_record([
            c.policy.clone(),
            c.snr_db.to_string(),
            c.t_coh_ms.to_string(),
            c.q_bits.to_string(),
            c.k.to_string(),
            c.mean_throughput.to_string(),
            c.stderr_throughput.to_string(),
            c.mean_m_bs.to_string(),
            c.mean_omega.to_string(),
            c.mean_gcmd.to_string(),
            c.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(result: &CampaignResult, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, result)?;
    Ok(())
}

/// Write `result` to `path` in the requested format.
pub fn emit_results(result: &CampaignResult, format: Format, path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        Format::Csv => write_csv(&result.cells, file),
        Format::Json => write_json(result, file),
    }
}

/// Load a JSON result written by [`emit_results`].
pub fn load_json(path: &Path) -> Result<CampaignResult> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Render the cells as CSV text.
pub fn csv_string(cells: &[CellResult]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(cells, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::invalid(e.to_string()))
}
