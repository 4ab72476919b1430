//! Report emission: turning a run report into files.
//!
//! Three formats are supported. `json` writes the full report and
//! round-trips: parsing the emitted file yields an equal report. `csv`
//! flattens every numeric fact into `(diagnostic, certificate, value)`
//! rows, where certificates are named `check:name` and recorded
//! tolerances appear as `tolerance:name`. `plot-data` writes one
//! two-column `index,value` file per named series, ready for a plotting
//! tool.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::report::RunReport;

/// The supported output formats, named `json`, `csv`, and `plot-data` on
/// the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EmitFormat {
    Json,
    Csv,
    PlotData,
}

/// Writes the report in the requested format into `out`, creating the
/// directory if needed, and returns the paths written. Unwritable paths
/// are reported as errors, never panics.
pub fn emit(report: &RunReport, format: EmitFormat, out: &Path) -> Result<Vec<PathBuf>, String> {
    fs::create_dir_all(out)
        .map_err(|e| format!("cannot create the output directory {}: {e}", out.display()))?;
    let write = |path: PathBuf, content: &str| -> Result<PathBuf, String> {
        fs::write(&path, content.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        Ok(path)
    };
    match format {
        EmitFormat::Json => Ok(vec![write(out.join("report.json"), &report.to_json())?]),
        EmitFormat::Csv => {
            let mut table = String::from("diagnostic,certificate,value\n");
            for entry in &report.diagnostics {
                for verdict in &entry.verdicts {
                    for certificate in &verdict.certificates {
                        let _ = writeln!(
                            table,
                            "{},{}:{},{}",
                            entry.diagnostic, verdict.check, certificate.name, certificate.value
                        );
                    }
                }
                for tolerance in &entry.tolerances {
                    let _ = writeln!(
                        table,
                        "{},tolerance:{},{}",
                        entry.diagnostic, tolerance.name, tolerance.value
                    );
                }
            }
            Ok(vec![write(out.join("report.csv"), &table)?])
        }
        EmitFormat::PlotData => {
            let mut written = Vec::new();
            for entry in &report.diagnostics {
                for series in &entry.series {
                    let mut column = String::from("index,value\n");
                    for (index, value) in series.values.iter().enumerate() {
                        let _ = writeln!(column, "{index},{value}");
                    }
                    let name = format!("{}-{}.csv", entry.diagnostic, series.name);
                    written.push(write(out.join(name), &column)?);
                }
            }
            Ok(written)
        }
    }
}
