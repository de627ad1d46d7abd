//! Flat `key = value` experiment files. Command-line flags take precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Every key a config file may set; names match the long flags.
pub const KNOWN_KEYS: &[&str] = &[
    "threads", "seq", "q", "s", "seq-p", "table", "seed", "len", "p", "r", "family", "lambda",
    "cap", "blocks", "m-list", "n-list", "out-dir", "no-plot", "p1", "p2", "r2", "kind", "n",
    "m", "x", "k-max", "grid", "thresholds", "point", "nearest", "rational", "check", "horizon",
    "big-n", "n-max",
];

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

#[derive(Debug, Default, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("config: cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected `key = value`", no + 1)))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(usage(format!("config line {}: unknown key `{key}`", no + 1)));
            }
            values.insert(key, value.trim().trim_matches('"').to_string());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the parsed config entry, else `None`.
    pub fn pick<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, UsageError>
    where
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| usage(format!("config key `{key}`: {e}"))),
        }
    }

    pub fn or<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, UsageError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.pick(key, flag)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str, flag: bool) -> Result<bool, UsageError> {
        if flag {
            return Ok(true);
        }
        match self.raw(key) {
            None => Ok(false),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(usage(format!("config key `{key}`: expected a boolean, got `{v}`"))),
        }
    }
}

pub fn parse_list<T: FromStr>(key: &str, text: &str) -> Result<Vec<T>, UsageError>
where
    T::Err: fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| usage(format!("`{key}`: bad entry `{s}`: {e}"))))
        .collect()
}

pub fn parse_pair<T: FromStr + Copy>(key: &str, text: &str) -> Result<(T, T), UsageError>
where
    T::Err: fmt::Display,
{
    let v: Vec<T> = parse_list(key, text)?;
    match v.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(usage(format!("`{key}`: expected two comma-separated values"))),
    }
}

/// `m:n,m:n,...`
pub fn parse_blocks(text: &str) -> Result<Vec<(u64, u64)>, UsageError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|b| {
            let (m, n) = b
                .split_once(':')
                .ok_or_else(|| usage(format!("`blocks`: expected m:n, got `{b}`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|e| usage(format!("`blocks`: bad index `{s}`: {e}")))
            };
            Ok((parse(m)?, parse(n)?))
        })
        .collect()
}

/// `key=value` pairs separated by commas, as in `r=3,ppb=2,eps=1e-6`.
pub fn parse_kv(key: &str, text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| usage(format!("`{key}`: expected name=value, got `{kv}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let c = Config::parse("# comment\n[run]\nseq = geometric\np=2\nout_dir = \"res\"\n").unwrap();
        assert_eq!(c.raw("seq"), Some("geometric"));
        assert_eq!(c.or("p", None::<f64>, 1.0).unwrap(), 2.0);
        assert_eq!(c.or("p", Some(3.0), 1.0).unwrap(), 3.0);
        assert_eq!(c.raw("out-dir"), Some("res"));
        assert!(Config::parse("bogus = 1").is_err());
        assert!(Config::parse("p").is_err());
        assert!(c.pick::<f64>("seq", None).is_err());
    }

    #[test]
    fn list_helpers() {
        assert_eq!(parse_blocks("4:16, 8:8").unwrap(), vec![(4, 16), (8, 8)]);
        assert!(parse_blocks("4-16").is_err());
        assert_eq!(parse_list::<u64>("t", "1,2,,3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_pair::<f64>("point", "1.5,2").unwrap(), (1.5, 2.0));
        let kv = parse_kv("grid", "r=3,ppb=2").unwrap();
        assert_eq!(kv["r"], "3");
    }
}
