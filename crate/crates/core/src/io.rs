//! Small text-format helpers shared by the codebook, outer-code, scheme and
//! config files.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type KeyValues = BTreeMap<String, String>;

/// Parses whitespace-separated `key=value` header tokens.
pub fn parse_header_fields<'a, I: IntoIterator<Item = &'a str>>(tokens: I) -> Result<KeyValues> {
    let mut out = KeyValues::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {tok:?}")))?;
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Parse(format!("duplicate key {k:?}")));
        }
    }
    Ok(out)
}

/// Parses `key=value` lines. Blank lines and lines starting with `#` are
/// skipped; whitespace around keys and values is trimmed.
pub fn parse_key_values(text: &str) -> Result<KeyValues> {
    let mut out = KeyValues::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
        let k = k.trim();
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(Error::Parse(format!("line {}: duplicate key {k:?}", lineno + 1)));
        }
    }
    Ok(out)
}

pub fn field<T: FromStr>(kv: &KeyValues, key: &str) -> Result<T> {
    let raw = kv
        .get(key)
        .ok_or_else(|| Error::Parse(format!("missing field {key:?}")))?;
    raw.parse()
        .map_err(|_| Error::Parse(format!("field {key:?} has invalid value {raw:?}")))
}

pub fn field_or<T: FromStr>(kv: &KeyValues, key: &str, default: T) -> Result<T> {
    if kv.contains_key(key) {
        field(kv, key)
    } else {
        Ok(default)
    }
}

pub fn field_usize(kv: &KeyValues, key: &str) -> Result<usize> {
    field(kv, key)
}
