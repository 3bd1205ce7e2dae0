//! Report assembly and atomic output.
//!
//! Every JSON report carries the same envelope (schema version, command,
//! generator name, seed, echoed config) so that identical config + seed
//! reproduce byte-identical files. Writes go through a temp file and a
//! rename; a failing command never leaves a partial report behind.

use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: &str = "1";

/// Wraps a payload into the standard envelope and pretty-prints it.
pub fn envelope(command: &str, seed: u64, config: Value, payload: Value) -> String {
    let mut root = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "rng": qpir_core::linalg::sampling::RNG_NAME,
        "seed": seed,
        "config": config,
    });
    let obj = root.as_object_mut().expect("envelope is an object");
    if let Value::Object(extra) = payload {
        for (k, v) in extra {
            obj.insert(k, v);
        }
    } else {
        obj.insert("result".into(), payload);
    }
    let mut text = serde_json::to_string_pretty(&root).expect("report serializes");
    text.push('\n');
    text
}

/// CSV-quotes a field when it contains separators or quotes.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes to `path` atomically (temp file + rename), or to stdout when no
/// path is given.
pub fn emit(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    match path {
        None => {
            print!("{content}");
            std::io::stdout().flush()
        }
        Some(p) => {
            let mut tmp = p.as_os_str().to_owned();
            tmp.push(".tmp");
            let tmp_path = Path::new(&tmp);
            fs::write(tmp_path, content)?;
            fs::rename(tmp_path, p)
        }
    }
}
