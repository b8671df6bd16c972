//! CSV output with a configuration-echo header.

use std::io::Write;

use ionqec_core::noise::NoiseParams;
use sha2::{Digest, Sha256};
use toml::Table;

use crate::config::CONFIG_LINE;
use crate::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Short hex digest of the effective configuration.
pub fn config_hash(config: &Table) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}

/// Header lines: a summary line, then the effective configuration as
/// `#! `-prefixed TOML that `--config` reads back.
pub fn header(command: &str, config: &Table) -> String {
    let mut out = format!("# ionqec {command} config_hash={}\n", config_hash(config));
    for line in config.to_string().lines() {
        out.push_str(CONFIG_LINE);
        out.push_str(line);
        out.push('\n');
    }
    out
}

pub const NOISE_COLUMNS: [&str; 12] = [
    "p_1q",
    "p_ms",
    "p_c",
    "crosstalk_mode",
    "refocussing",
    "p_sp",
    "p_m",
    "prep_leak_fraction",
    "t1",
    "t2",
    "leak_branching",
    "p_sg",
];

pub fn noise_fields(p: &NoiseParams) -> Vec<String> {
    vec![
        num(p.p_1q),
        num(p.p_ms),
        num(p.p_c),
        p.crosstalk_mode.as_str().to_string(),
        p.refocussing.to_string(),
        num(p.p_sp),
        num(p.p_m),
        num(p.prep_leak_fraction),
        num(p.t1),
        num(p.t2),
        num(p.leak_branching),
        num(p.p_sg),
    ]
}

/// A CSV table followed by optional `#` footer lines.
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub footer: Vec<String>,
}

impl CsvTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn render(&self, header: &str) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        let mut out = header.to_string();
        out.push_str(&String::from_utf8_lossy(&body));
        for f in &self.footer {
            out.push_str("# ");
            out.push_str(f);
            out.push('\n');
        }
        Ok(out)
    }
}

fn io(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&std::path::Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
