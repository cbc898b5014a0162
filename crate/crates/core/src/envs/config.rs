//! Plain-text environment configuration.
//!
//! ```text
//! # comment
//! slip = 0.1
//! horizon = 30
//! layout:
//! #######
//! #S..1.#
//! #######
//! ```
//!
//! Everything after the `layout:` line is taken verbatim as grid rows (blank
//! lines dropped).

use std::collections::BTreeMap;
use std::str::FromStr;

use super::EnvError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnvConfig {
    values: BTreeMap<String, (String, usize)>,
    layout: Option<Vec<String>>,
}

impl EnvConfig {
    pub fn parse(text: &str) -> Result<Self, EnvError> {
        let mut cfg = EnvConfig::default();
        let mut lines = text.lines().enumerate();
        for (i, raw) in lines.by_ref() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line == "layout:" {
                cfg.layout = Some(Vec::new());
                break;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| EnvError::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(EnvError::Config {
                    line: line_no,
                    message: "empty key".into(),
                });
            }
            if cfg
                .values
                .insert(key.to_string(), (value.trim().to_string(), line_no))
                .is_some()
            {
                return Err(EnvError::Config {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        if let Some(rows) = cfg.layout.as_mut() {
            rows.extend(
                lines
                    .map(|(_, l)| l.trim_end())
                    .filter(|l| !l.is_empty())
                    .map(str::to_string),
            );
        }
        Ok(cfg)
    }

    pub fn layout(&self) -> Option<&[String]> {
        self.layout.as_deref()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    /// Parsed value of `key`, or `default` when absent.
    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, EnvError> {
        match self.values.get(key) {
            None => Ok(default),
            Some((raw, line)) => raw.parse().map_err(|_| EnvError::Config {
                line: *line,
                message: format!("cannot parse value `{raw}` of `{key}`"),
            }),
        }
    }

    /// Rejects keys outside `known`, so typos do not pass silently.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), EnvError> {
        for (key, (_, line)) in &self.values {
            if !known.contains(&key.as_str()) {
                return Err(EnvError::Config {
                    line: *line,
                    message: format!("unknown key `{key}` (known: {})", known.join(", ")),
                });
            }
        }
        Ok(())
    }
}
