//! Flat key=value config files and provenance headers.
//!
//! A config file supplies defaults for any long flag, using dotted keys
//! scoped by subcommand (`ica.seed = 7`, `paths.cache-dir = runs/cache`).
//! Explicit flags always win. Every output file carries a provenance header
//! with the tool version, a hash of the resolved settings, and the seeds in
//! effect.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::CmdError;

pub const TOOL: &str = concat!("icomp v", env!("CARGO_PKG_VERSION"));

/// Parsed config file: dotted keys to raw string values.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CmdError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CmdError::Data(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CmdError::Usage(format!(
                    "{}:{}: expected 'key = value'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let value = value.trim().trim_matches('"');
            values.insert(key.trim().to_string(), value.to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }
}

/// Resolves a setting: explicit flag, then config key, then default.
/// Records the effective value for hashing and headers.
pub struct Resolver<'a> {
    config: &'a ConfigFile,
    effective: BTreeMap<String, String>,
}

impl<'a> Resolver<'a> {
    pub fn new(config: &'a ConfigFile) -> Self {
        Self {
            config,
            effective: BTreeMap::new(),
        }
    }

    pub fn resolve<T: std::str::FromStr + std::fmt::Debug>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, CmdError> {
        let value = match flag {
            Some(v) => v,
            None => match self.config.get(key) {
                Some(raw) => raw.parse::<T>().map_err(|_| {
                    CmdError::Usage(format!("config key '{key}': cannot parse '{raw}'"))
                })?,
                None => default,
            },
        };
        self.effective.insert(key.to_string(), format!("{value:?}"));
        Ok(value)
    }

    pub fn resolve_opt<T: std::str::FromStr + std::fmt::Debug>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>, CmdError> {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.config.get(key) {
                Some(raw) => Some(raw.parse::<T>().map_err(|_| {
                    CmdError::Usage(format!("config key '{key}': cannot parse '{raw}'"))
                })?),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.effective.insert(key.to_string(), format!("{v:?}"));
        }
        Ok(value)
    }

    /// Records a derived setting that has no flag.
    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.effective.insert(key.to_string(), value.to_string());
    }

    /// SHA-256 over the sorted effective `key=value` lines, abbreviated.
    pub fn config_hash(&self) -> String {
        let mut canon = String::new();
        for (k, v) in &self.effective {
            let _ = writeln!(canon, "{k}={v}");
        }
        let digest = Sha256::digest(canon.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }
}

/// Provenance block emitted at the top of every output file.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub layout: &'static str,
    pub config_hash: String,
    pub extras: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(layout: &'static str, resolver: &Resolver) -> Self {
        Self {
            layout,
            config_hash: resolver.config_hash(),
            extras: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extras.push((key.to_string(), value.to_string()));
        self
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("tool: {TOOL}"),
            format!("layout: {}", self.layout),
            format!("config-hash: {}", self.config_hash),
        ];
        for (k, v) in &self.extras {
            out.push(format!("{k}: {v}"));
        }
        out
    }

    /// `#`-prefixed header for CSV/TSV files.
    pub fn hash_comments(&self) -> String {
        let mut out = String::new();
        for line in self.lines() {
            let _ = writeln!(out, "# {line}");
        }
        out
    }

    /// Compact form stored inside binary caches.
    pub fn meta_string(&self) -> String {
        self.lines().join("; ")
    }

    /// JSON object mirrored into JSON outputs.
    pub fn json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("record".into(), "provenance".into());
        map.insert("tool".into(), TOOL.into());
        map.insert("layout".into(), self.layout.into());
        map.insert("config_hash".into(), self.config_hash.clone().into());
        for (k, v) in &self.extras {
            map.insert(k.replace([' ', '-'], "_"), v.clone().into());
        }
        serde_json::Value::Object(map)
    }
}

/// Parses a comma-separated list of values.
pub fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>, CmdError> {
    raw.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CmdError::Usage(format!("bad {what} entry '{s}'")))
        })
        .collect()
}
