use std::path::Path;

use crate::error::{Error, Result};
use crate::repcount::validate_set;

/// Parses one positive integer per line, strictly increasing. Blank lines
/// are skipped.
pub fn parse_set(text: &str) -> Result<Vec<u64>> {
    let mut set = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v = line
            .parse::<u64>()
            .map_err(|e| Error::Parse(format!("line {}: {line:?}: {e}", i + 1)))?;
        set.push(v);
    }
    validate_set(&set)?;
    Ok(set)
}

pub fn read_set_file(path: impl AsRef<Path>) -> Result<Vec<u64>> {
    parse_set(&std::fs::read_to_string(path)?)
}

/// The inverse of [`parse_set`].
pub fn format_set(set: &[u64]) -> String {
    set.iter().map(|v| format!("{v}\n")).collect()
}
