//! JSON config loading with command-line overrides.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;
use sparse_armax::{Error, Result};

/// Reads `path` (or starts from `default` when absent), applies `--set key=value` overrides,
/// fills top-level keys still missing from `fallbacks`, applies typed flag overrides and
/// deserializes the result.
pub fn load<T: DeserializeOwned>(
    path: Option<&Path>,
    default: Value,
    sets: &[String],
    fallbacks: &[(&str, Value)],
    flags: &[(&str, Value)],
) -> Result<T> {
    let mut value = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => default,
    };
    for item in sets {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got '{item}'")))?;
        set_path(&mut value, key, parse_value(raw))?;
    }
    if let Value::Object(map) = &mut value {
        for (key, v) in fallbacks {
            map.entry(key.to_string()).or_insert_with(|| v.clone());
        }
    }
    for (key, v) in flags {
        set_path(&mut value, key, v.clone())?;
    }
    serde_json::from_value(value).map_err(|e| Error::Config(format!("invalid config: {e}")))
}

/// JSON when it parses as JSON, a plain string otherwise.
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Sets a dotted path such as `algorithms.0.mu`, creating objects as needed.
pub fn set_path(root: &mut Value, key: &str, new: Value) -> Result<()> {
    if key.is_empty() {
        return Err(Error::Config("empty override key".into()));
    }
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), new);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert(Value::Null)
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Error::Config(format!("'{part}' in '{key}' is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| Error::Config(format!("index {idx} in '{key}' is out of range (length {len})")))?;
                if last {
                    *slot = new;
                    return Ok(());
                }
                slot
            }
            _ => return Err(Error::Config(format!("'{key}' descends into a scalar"))),
        };
    }
    unreachable!("loop returns on the last path component")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn dotted_paths() {
        let mut v = json!({"a": {"b": 1}, "list": [{"mu": 1.0}]});
        set_path(&mut v, "a.b", json!(2)).unwrap();
        set_path(&mut v, "a.c.d", json!("x")).unwrap();
        set_path(&mut v, "list.0.mu", json!(3.5)).unwrap();
        assert_eq!(v, json!({"a": {"b": 2, "c": {"d": "x"}}, "list": [{"mu": 3.5}]}));
        assert!(set_path(&mut v, "list.4.mu", json!(1)).is_err());
        assert!(set_path(&mut v, "a.b.c", json!(1)).is_err());
    }

    #[test]
    fn values_parse_as_json_or_string() {
        assert_eq!(parse_value("5"), json!(5));
        assert_eq!(parse_value("[0.5, 1]"), json!([0.5, 1]));
        assert_eq!(parse_value("example2"), json!("example2"));
    }
}
