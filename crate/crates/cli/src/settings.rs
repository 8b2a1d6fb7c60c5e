//! Config loading: preset or default base, JSON file on top, then dotted-key
//! overrides from the command line.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Long flags the subcommands define; every other `--name` is an override.
const KNOWN_FLAGS: &[&str] = &[
    "config",
    "seed",
    "out",
    "preset",
    "threads",
    "dataset",
    "estimator",
    "help",
    "version",
];

/// A `--dotted.key value` pair pulled out of the argument list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Override {
    pub key: String,
    pub value: String,
}

/// Splits argv into what clap should see and the config overrides.
pub fn split_overrides(args: Vec<String>) -> CliResult<(Vec<String>, Vec<Override>)> {
    let mut kept = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut iter = args.into_iter();
    kept.extend(iter.next());
    while let Some(arg) = iter.next() {
        if arg == "--" {
            kept.push(arg);
            kept.extend(iter);
            break;
        }
        let Some(body) = arg.strip_prefix("--") else {
            kept.push(arg);
            continue;
        };
        let (name, inline) = match body.split_once('=') {
            Some((n, v)) => (n, Some(v.to_string())),
            None => (body, None),
        };
        if KNOWN_FLAGS.contains(&name) || name.is_empty() {
            kept.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => iter
                .next()
                .ok_or_else(|| CliError::config(format!("override --{name} needs a value")))?,
        };
        overrides.push(Override {
            key: name.to_string(),
            value,
        });
    }
    Ok((kept, overrides))
}

#[derive(Deserialize)]
struct Wrapped<T> {
    config: T,
}

/// Reads a config file, which may be a bare config or a run manifest (whose
/// `config` member is used). Type errors carry the file's line and column.
pub fn read_config_file<T: DeserializeOwned>(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let anchored = |e: serde_json::Error| {
        CliError::config(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    };
    let value: Value = serde_json::from_str(&text).map_err(anchored)?;
    let is_manifest = value.get("tool_version").is_some() && value.get("config").is_some();
    // Typed parse only for its error positions; merging works on the raw value.
    let _checked: T = if is_manifest {
        serde_json::from_str::<Wrapped<T>>(&text)
            .map_err(anchored)?
            .config
    } else {
        serde_json::from_str(&text).map_err(anchored)?
    };
    Ok(if is_manifest {
        value["config"].clone()
    } else {
        value
    })
}

/// `base`, overlaid with the file (if any), then the overrides in order.
pub fn resolve<T: Serialize + DeserializeOwned>(
    base: &T,
    file: Option<&Path>,
    overrides: &[Override],
) -> CliResult<T> {
    let mut value = serde_json::to_value(base)
        .map_err(|e| CliError::config(format!("cannot serialize config: {e}")))?;
    if let Some(path) = file {
        merge(&mut value, read_config_file::<T>(path)?);
    }
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    serde_json::from_value(value).map_err(|e| {
        let keys: Vec<String> = overrides.iter().map(|o| format!("--{}", o.key)).collect();
        if keys.is_empty() {
            CliError::config(format!("invalid config: {e}"))
        } else {
            CliError::config(format!(
                "invalid config after overrides {}: {e}",
                keys.join(" ")
            ))
        }
    })
}

// Tagged objects (those with a "kind" member) are replaced whole so stale
// variant fields do not survive.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) if !t.contains_key("kind") => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, t) => *slot = t,
    }
}

/// Sets the value at a dotted path. The value is read as JSON when it
/// parses (numbers, booleans, objects) and as a bare string otherwise.
pub fn apply_override(root: &mut Value, o: &Override) -> CliResult<()> {
    let parsed = serde_json::from_str::<Value>(&o.value).unwrap_or(Value::String(o.value.clone()));
    let segments: Vec<&str> = o.key.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(CliError::config(format!("malformed key --{}", o.key)));
    }
    let (last, parents) = segments.split_last().expect("split yields a segment");
    let mut node = root;
    for (depth, seg) in parents.iter().enumerate() {
        node = node
            .as_object_mut()
            .and_then(|m: &mut Map<String, Value>| m.get_mut(*seg))
            .ok_or_else(|| {
                CliError::config(format!(
                    "unknown config key --{} (no section {})",
                    o.key,
                    segments[..=depth].join(".")
                ))
            })?;
    }
    let map = node
        .as_object_mut()
        .ok_or_else(|| CliError::config(format!("--{}: parent is not a section", o.key)))?;
    let tagged = map.contains_key("kind");
    if !map.contains_key(*last) && !tagged {
        return Err(CliError::config(format!("unknown config key --{}", o.key)));
    }
    map.insert(last.to_string(), parsed);
    Ok(())
}
