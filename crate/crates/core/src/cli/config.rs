//! Parameter resolution: command-line flags override a plain-text
//! `key = value` config file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::CliError;

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "SCREENLAB_CONFIG";

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl ConfigFile {
    /// Lines are `key = value`; blank lines and lines starting with `#` are
    /// skipped. Keys match flag names, with `_` accepted for `-`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "config line {}: expected `key = value`",
                    lineno + 1
                ))
            })?;
            values.insert(normalize(key), value.trim().to_owned());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Flag value if given, else the config value, else `None`.
    pub fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                CliError::Usage(format!("config value for `{key}` is not valid: `{raw}`"))
            }),
        }
    }

    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, CliError> {
        self.get(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("missing required parameter --{key}")))
    }

    pub fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    /// A switch is on when passed as a flag or set to `true` in the file.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        self.or(None, key, false)
    }
}
