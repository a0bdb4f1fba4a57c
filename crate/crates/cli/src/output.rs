use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Renders the config echo and the rows. CSV files start with two `#` lines
/// (tool version, config as JSON); JSON is one object with the same content.
pub fn render<C: Serialize, R: Serialize>(config: &C, rows: &[R], format: Format) -> Result<String, String> {
    let config_json = serde_json::to_string(config).map_err(|e| e.to_string())?;
    match format {
        Format::Csv => {
            let mut out = format!("# prclab {VERSION}\n# config {config_json}\n");
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(|e| e.to_string())?;
            }
            let body = w.into_inner().map_err(|e| e.to_string())?;
            out.push_str(&String::from_utf8(body).map_err(|e| e.to_string())?);
            Ok(out)
        }
        Format::Json => {
            let doc = serde_json::json!({
                "prclab": VERSION,
                "config": config,
                "rows": rows,
            });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// The whole report is rendered before this is called, so a failed run never
/// leaves a partial file behind.
pub fn emit(text: &str, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}
