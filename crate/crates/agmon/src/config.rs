use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{config_err, CliResult};

/// Every section and key the config file may contain. Anything else is a
/// typo and gets rejected at load time, not silently ignored.
const SCHEMA: &[(&str, &[&str])] = &[
    ("global", &["out_dir", "threads"]),
    ("cube-stats", &["reducer", "mode", "buffer"]),
    ("sits-prepare", &["step", "window", "lo", "hi"]),
    ("indices", &["indices", "tbase"]),
    ("pheno-metrics", &["despike-passes", "despike-z"]),
    ("pheno-estimate", &["seed", "select"]),
    ("pheno-continuous", &["tw", "slope-step", "dop"]),
    ("rice-map", &["seed", "k-min", "k-max", "trees", "depth", "pixel-area"]),
    ("cap-sample", &["green", "yellow", "red", "season-filter"]),
    ("cap-greening", &[]),
    ("cap-smr1", &["buffer"]),
    ("eval", &[]),
];

/// Parsed key = value settings, one `[section]` per subcommand plus
/// `[global]`. Flags always win over the file.
#[derive(Debug, Default)]
pub struct RunConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<RunConfig> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| config_err(format!("{}: {e}", p.display())))?;
                RunConfig::parse(&text)
            }
        }
    }

    pub fn parse(text: &str) -> CliResult<RunConfig> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = inner.trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(config_err(format!("line {lineno}: unknown section [{name}]")));
                }
                sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_err(format!("line {lineno}: expected key = value")));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(section) = current.as_deref() else {
                return Err(config_err(format!(
                    "line {lineno}: key `{key}` outside any [section]"
                )));
            };
            let allowed = SCHEMA.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap();
            if !allowed.contains(&key) {
                return Err(config_err(format!(
                    "line {lineno}: unknown key `{key}` in [{section}]"
                )));
            }
            let prev = sections
                .get_mut(section)
                .unwrap()
                .insert(key.to_string(), value.to_string());
            if prev.is_some() {
                return Err(config_err(format!(
                    "line {lineno}: duplicate key `{key}` in [{section}]"
                )));
            }
        }
        Ok(RunConfig { sections })
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    /// Flag beats file beats default.
    pub fn resolve<T: FromStr>(
        &self,
        flag: Option<T>,
        section: &str,
        key: &str,
        default: T,
    ) -> CliResult<T> {
        Ok(self.resolve_opt(flag, section, key)?.unwrap_or(default))
    }

    pub fn resolve_opt<T: FromStr>(
        &self,
        flag: Option<T>,
        section: &str,
        key: &str,
    ) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(section, key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| config_err(format!("[{section}] {key} = {s}: not a valid value"))),
        }
    }
}

/// Inclusive range guard for numeric settings.
pub fn check_range<T: PartialOrd + Display>(name: &str, value: T, lo: T, hi: T) -> CliResult<T> {
    if value < lo || value > hi {
        return Err(config_err(format!("{name} = {value} outside [{lo}, {hi}]")));
    }
    Ok(value)
}
