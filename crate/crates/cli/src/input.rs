//! Command arguments are a file path, inline JSON, or a bare label.

use std::fs;
use std::path::Path;

use heightlab::corpus;
use heightlab::json::parse_text;
use heightlab::{Error, Result};
use serde_json::Value;

fn looks_inline(s: &str) -> bool {
    matches!(s.trim_start().chars().next(), Some('{' | '[' | '"')) || serde_json::from_str::<serde_json::Number>(s).is_ok()
}

fn looks_like_path(s: &str) -> bool {
    s.contains('/') || s.contains('\\') || s.ends_with(".json")
}

/// Resolves an argument to JSON. An existing file wins, then a corpus label
/// (some are all digits); inline JSON is parsed; anything path-shaped that does not exist is an I/O error; the
/// rest is taken as a label string.
pub fn resolve(arg: &str) -> Result<Value> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {arg}: {e}")))?;
        return parse_text(&text);
    }
    if corpus::curves().iter().any(|c| c.label == arg) {
        return Ok(Value::String(arg.to_string()));
    }
    if looks_inline(arg) {
        return parse_text(arg);
    }
    if looks_like_path(arg) {
        return Err(Error::Input(format!("no such file: {arg}")));
    }
    Ok(Value::String(arg.to_string()))
}
