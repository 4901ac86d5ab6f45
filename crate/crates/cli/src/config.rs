//! Run-configuration parsing.
//!
//! Two input encodings share one data model: a plain-text key-value format
//! and JSON. The text grammar is line-oriented:
//!
//! ```text
//! # comment                      (also allowed after values)
//! schema_version = 1             (keys before any section are root keys)
//!
//! [flow]                         (section header)
//! phi = 1e3                      (key = value)
//! alpha = 1.0
//!
//! [sweep]
//! phi = 1e2, 1e3, 1e4            (lists are comma separated)
//! xi = logspace(1e-2, 1e1, 7)    (or log-spaced with inclusive endpoints)
//! ```
//!
//! A JSON document is accepted when the file starts with `{`: root keys map
//! to scalar members, sections to nested objects, lists to arrays. Every key
//! must be consumed by the command that runs; unknown sections or keys are
//! configuration errors, as are duplicate keys and missing `schema_version`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::CmdError;

/// The one schema this binary reads and writes.
pub const SCHEMA_VERSION: u64 = 1;

/// Parsed configuration: `sections[""]` holds the root keys.
#[derive(Debug)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
    consumed: std::cell::RefCell<BTreeSet<(String, String)>>,
}

fn config_err(msg: impl Into<String>) -> CmdError {
    CmdError::Config(msg.into())
}

impl RawConfig {
    /// Reads and parses a configuration file, then checks `schema_version`.
    pub fn load(path: &Path) -> Result<Self, CmdError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        let cfg = if text.trim_start().starts_with('{') {
            Self::from_json(&text)?
        } else {
            Self::from_text(&text)?
        };
        match cfg.get("", "schema_version") {
            Some(v) if v.trim() == SCHEMA_VERSION.to_string() => Ok(cfg),
            Some(v) => Err(config_err(format!(
                "unsupported schema_version {v}; this build reads version {SCHEMA_VERSION}"
            ))),
            None => Err(config_err("missing required root key schema_version")),
        }
    }

    fn from_text(text: &str) -> Result<Self, CmdError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        sections.entry(current.clone()).or_default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        config_err(format!("line {}: unterminated section header", lineno + 1))
                    })?
                    .trim();
                if name.is_empty() {
                    return Err(config_err(format!(
                        "line {}: empty section name",
                        lineno + 1
                    )));
                }
                current = name.to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_err(format!(
                    "line {}: expected `key = value` or `[section]`, got {line:?}",
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(config_err(format!("line {}: empty key", lineno + 1)));
            }
            let section = sections.entry(current.clone()).or_default();
            if section.insert(key.clone(), value).is_some() {
                return Err(config_err(format!(
                    "line {}: duplicate key {key:?} in section {current:?}",
                    lineno + 1
                )));
            }
        }
        Ok(Self {
            sections,
            consumed: Default::default(),
        })
    }

    fn from_json(text: &str) -> Result<Self, CmdError> {
        let doc: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| config_err(format!("invalid JSON config: {e}")))?;
        let obj = doc
            .as_object()
            .ok_or_else(|| config_err("JSON config must be an object"))?;
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        sections.entry(String::new()).or_default();
        for (key, value) in obj {
            match value {
                serde_json::Value::Object(inner) => {
                    let section = sections.entry(key.clone()).or_default();
                    for (k, v) in inner {
                        section.insert(k.clone(), json_scalar(key, k, v)?);
                    }
                }
                _ => {
                    let rendered = json_scalar("(root)", key, value)?;
                    sections.get_mut("").unwrap().insert(key.clone(), rendered);
                }
            }
        }
        Ok(Self {
            sections,
            consumed: Default::default(),
        })
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        let v = self.sections.get(section)?.get(key)?;
        self.consumed
            .borrow_mut()
            .insert((section.to_string(), key.to_string()));
        Some(v.as_str())
    }

    /// String value of `section.key`, if present.
    pub fn get_str(&self, section: &str, key: &str) -> Option<String> {
        self.get(section, key).map(|s| s.to_string())
    }

    /// Required string value.
    pub fn require_str(&self, section: &str, key: &str) -> Result<String, CmdError> {
        self.get_str(section, key)
            .ok_or_else(|| config_err(format!("missing required key {}", dotted(section, key))))
    }

    /// Optional float value.
    pub fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>, CmdError> {
        self.get(section, key)
            .map(|s| parse_f64(s).map_err(|e| bad_value(section, key, s, &e)))
            .transpose()
    }

    /// Required float value.
    pub fn require_f64(&self, section: &str, key: &str) -> Result<f64, CmdError> {
        self.get_f64(section, key)?
            .ok_or_else(|| config_err(format!("missing required key {}", dotted(section, key))))
    }

    /// Optional unsigned integer value.
    pub fn get_u64(&self, section: &str, key: &str) -> Result<Option<u64>, CmdError> {
        self.get(section, key)
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|e| bad_value(section, key, s, &e.to_string()))
            })
            .transpose()
    }

    /// Optional usize value.
    pub fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>, CmdError> {
        Ok(self.get_u64(section, key)?.map(|v| v as usize))
    }

    /// Optional boolean (`true`/`false`).
    pub fn get_bool(&self, section: &str, key: &str) -> Result<Option<bool>, CmdError> {
        self.get(section, key)
            .map(|s| match s.trim() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(bad_value(section, key, other, "expected true or false")),
            })
            .transpose()
    }

    /// Required list of floats: comma separated values or
    /// `logspace(start, stop, count)`.
    pub fn require_f64_list(&self, section: &str, key: &str) -> Result<Vec<f64>, CmdError> {
        let raw = self.require_str(section, key)?;
        let values = parse_f64_list(&raw).map_err(|e| bad_value(section, key, &raw, &e))?;
        if values.is_empty() {
            return Err(config_err(format!(
                "{} must not be empty",
                dotted(section, key)
            )));
        }
        Ok(values)
    }

    /// All `(key, value)` pairs of a section, marking them consumed; used by
    /// sections whose keys are data (e.g. quantity-name → exponent maps).
    pub fn section_items(&self, section: &str) -> Vec<(String, String)> {
        let Some(entries) = self.sections.get(section) else {
            return Vec::new();
        };
        let mut consumed = self.consumed.borrow_mut();
        entries
            .iter()
            .map(|(k, v)| {
                consumed.insert((section.to_string(), k.clone()));
                (k.clone(), v.clone())
            })
            .collect()
    }

    /// Errors if any parsed key was never consumed by the command.
    pub fn reject_unknown(&self) -> Result<(), CmdError> {
        let consumed = self.consumed.borrow();
        let mut unknown = Vec::new();
        for (section, entries) in &self.sections {
            for key in entries.keys() {
                if !consumed.contains(&(section.clone(), key.clone())) {
                    unknown.push(dotted(section, key));
                }
            }
        }
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(config_err(format!(
                "unknown configuration keys: {}",
                unknown.join(", ")
            )))
        }
    }
}

fn dotted(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn bad_value(section: &str, key: &str, value: &str, why: &str) -> CmdError {
    config_err(format!(
        "bad value for {}: {value:?} ({why})",
        dotted(section, key)
    ))
}

fn json_scalar(section: &str, key: &str, v: &serde_json::Value) -> Result<String, CmdError> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::Bool(b) => Ok(b.to_string()),
        serde_json::Value::Array(items) => {
            let mut out = String::new();
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                match item {
                    serde_json::Value::Number(n) => write!(out, "{n}").unwrap(),
                    other => {
                        return Err(config_err(format!(
                            "{section}.{key}: arrays may contain only numbers, got {other}"
                        )))
                    }
                }
            }
            Ok(out)
        }
        other => Err(config_err(format!(
            "{section}.{key}: unsupported JSON value {other}"
        ))),
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("value must be finite".into())
    }
}

fn parse_f64_list(raw: &str) -> Result<Vec<f64>, String> {
    let trimmed = raw.trim();
    if let Some(args) = trimmed
        .strip_prefix("logspace(")
        .and_then(|rest| rest.strip_suffix(')'))
    {
        let parts: Vec<&str> = args.split(',').collect();
        if parts.len() != 3 {
            return Err("logspace takes (start, stop, count)".into());
        }
        let start = parse_f64(parts[0])?;
        let stop = parse_f64(parts[1])?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|e| format!("logspace count: {e}"))?;
        if !(start > 0.0 && stop > 0.0) {
            return Err("logspace endpoints must be positive".into());
        }
        if count < 2 {
            return Err("logspace count must be at least 2".into());
        }
        let (la, lb) = (start.log10(), stop.log10());
        return Ok((0..count)
            .map(|i| 10f64.powf(la + (lb - la) * i as f64 / (count - 1) as f64))
            .collect());
    }
    trimmed.split(',').map(parse_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RawConfig {
        RawConfig::from_text(text).unwrap()
    }

    #[test]
    fn text_grammar_round_trips() {
        let cfg = parse("schema_version = 1\n# comment\n[flow]\nphi = 1e3 # inline\nalpha = 2\n");
        assert_eq!(cfg.get_str("", "schema_version").unwrap(), "1");
        assert_eq!(cfg.require_f64("flow", "phi").unwrap(), 1e3);
        assert_eq!(cfg.require_f64("flow", "alpha").unwrap(), 2.0);
        cfg.reject_unknown().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let cfg = parse("a = 1\n[s]\nb = 2\n");
        let _ = cfg.get_str("", "a");
        let err = cfg.reject_unknown().unwrap_err();
        assert!(format!("{err:?}").contains("s.b"));
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        assert!(RawConfig::from_text("a = 1\na = 2\n").is_err());
    }

    #[test]
    fn json_alternative_parses_sections_and_lists() {
        let cfg = RawConfig::from_json(
            r#"{"schema_version": 1, "sweep": {"phi": [100.0, 1000.0], "xi": 1.5}}"#,
        )
        .unwrap();
        assert_eq!(cfg.get_str("", "schema_version").unwrap(), "1");
        assert_eq!(
            cfg.require_f64_list("sweep", "phi").unwrap(),
            vec![100.0, 1000.0]
        );
        assert_eq!(cfg.require_f64("sweep", "xi").unwrap(), 1.5);
    }

    #[test]
    fn logspace_lists_hit_both_endpoints() {
        let v = parse_f64_list("logspace(1e2, 1e4, 5)").unwrap();
        assert_eq!(v.len(), 5);
        assert!((v[0] - 1e2).abs() < 1e-10);
        assert!((v[4] - 1e4).abs() < 1e-8);
        assert!((v[2] - 1e3).abs() < 1e-9);
    }

    #[test]
    fn malformed_lines_error_with_line_numbers() {
        let err = RawConfig::from_text("schema_version = 1\nnonsense\n").unwrap_err();
        assert!(format!("{err:?}").contains("line 2"));
    }
}
