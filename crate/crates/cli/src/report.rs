use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

/// Output of every command except `gen`. Apart from `wall_time_ms` the
/// report is a pure function of the command line and the input files.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub args: Value,
    /// The master seed and every named stream derived from it.
    pub seeds: BTreeMap<String, u64>,
    pub instance_digest: Option<String>,
    pub body: Value,
    pub oracle_queries: u64,
    pub passed: bool,
    pub wall_time_ms: f64,
}

pub fn emit(text: &str, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(path) => std::fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}
