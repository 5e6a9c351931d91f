//! Merging a JSON config file into the command line.
//!
//! Top-level scalar keys become global flags; an object under a subcommand
//! name supplies flags for that subcommand. Keys use snake_case or
//! kebab-case, arrays become comma-separated values. Config flags are
//! inserted before the user's own flags so the latter override them.

use std::path::PathBuf;

use serde_json::Value;
use voxskel_core::{Error, Result};

const GLOBAL_WITH_VALUE: [&str; 3] = ["--seed", "--threads", "--config"];

fn config_path(args: &[String]) -> Option<PathBuf> {
    let mut it = args.iter();
    let mut found = None;
    while let Some(a) = it.next() {
        if a == "--config" {
            found = it.next().map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            found = Some(PathBuf::from(p));
        }
    }
    found
}

/// Index of the subcommand name, skipping global flags and their values.
fn subcommand_index(args: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if GLOBAL_WITH_VALUE.contains(&a.as_str()) {
            i += 2;
            continue;
        }
        if a.starts_with('-') {
            i += 1;
            continue;
        }
        return Some(i);
    }
    None
}

fn render(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => Some(s.clone()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::Array(items) => Some(
            items
                .iter()
                .filter_map(render)
                .collect::<Vec<_>>()
                .join(","),
        ),
        Value::Null | Value::Object(_) => None,
    }
}

fn flags(map: &serde_json::Map<String, Value>) -> Vec<String> {
    let mut out = Vec::new();
    for (key, value) in map {
        if key == "config" {
            continue;
        }
        if let Some(v) = render(value) {
            out.push(format!("--{}={v}", key.replace('_', "-")));
        }
    }
    out
}

pub fn merge_config(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    let root: Value = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.clone(),
        reason: format!("bad config: {e}"),
    })?;
    let Value::Object(root) = root else {
        return Err(Error::Format {
            path,
            reason: "config must be a JSON object".into(),
        });
    };
    let Some(sub) = subcommand_index(&args) else {
        return Ok(args);
    };
    let mut merged = vec![args[0].clone()];
    merged.extend(flags(&root));
    merged.extend_from_slice(&args[1..sub]);
    merged.push(args[sub].clone());
    if let Some(Value::Object(section)) = root.get(&args[sub]) {
        merged.extend(flags(section));
    }
    merged.extend_from_slice(&args[sub + 1..]);
    Ok(merged)
}
