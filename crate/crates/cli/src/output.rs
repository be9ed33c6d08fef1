//! Output plumbing shared by all experiments: metadata headers, CSV and JSON
//! writers, and the 17-significant-digit float format that makes every file
//! parse back losslessly.
//!
//! Every artifact starts with (or, for JSON, contains) the full resolved
//! configuration and the seed, so a run is reproducible from any single
//! output file. CSV metadata lines are `#`-prefixed; data lines are plain
//! comma-separated values with a fixed, documented column order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ResolvedConfig;
use crate::CliError;

/// Tool name stamped into every header.
pub const TOOL_NAME: &str = "vantrees-lab";

/// `{:.16e}` prints 17 significant digits — enough for any f64 to survive a
/// write/parse round trip bit-exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One CSV cell: integers verbatim, floats through [`fmt_f64`].
#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(u64),
    Float(f64),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f64(v),
        }
    }
}

/// `#`-prefixed metadata block: tool version, experiment, seed, resolved
/// config (single-line JSON), and the column list.
pub fn metadata_header(cfg: &ResolvedConfig, columns: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {} {}", TOOL_NAME, env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# experiment = {}", cfg.experiment);
    let _ = writeln!(out, "# seed = {}", cfg.optimizer.seed);
    let _ = writeln!(out, "# config = {}", cfg.to_json_line());
    let _ = writeln!(out, "# columns = {columns}");
    out
}

/// Render a complete CSV document: metadata header, column header, rows.
pub fn render_csv(cfg: &ResolvedConfig, columns: &[&str], rows: &[Vec<Cell>]) -> String {
    let header = columns.join(",");
    let mut out = metadata_header(cfg, &header);
    out.push_str(&header);
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let line: Vec<String> = row.iter().map(|c| c.render()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Wrap an experiment payload with tool/config metadata and pretty-print it.
pub fn render_json<T: Serialize>(cfg: &ResolvedConfig, payload: &T) -> Result<String, CliError> {
    #[derive(Serialize)]
    struct Document<'a, T> {
        tool: &'static str,
        version: &'static str,
        config: &'a ResolvedConfig,
        #[serde(flatten)]
        payload: &'a T,
    }
    let doc = Document {
        tool: TOOL_NAME,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        payload,
    };
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Internal(format!("JSON serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Create the output directory (if needed) and write one file under it.
pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create output dir {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
