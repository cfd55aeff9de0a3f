//! Run settings: a flat `key = value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use foelner_rank::field::parse_rational;
use foelner_rank::{Field, GroupRingElement, GroupRingMatrix, MarkedGroup};
use num_rational::BigRational;
use serde_json::Value;

use crate::CliError;

pub const DEFAULT_GROUP: &str = "Z^1";

/// Resolved key/value settings for one command. Keys use the long flag
/// names without dashes in front.
#[derive(Clone, Debug)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn parse_file(text: &str, allowed: &[&str]) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", no + 1)))?;
        let key = key.trim().replace('_', "-");
        if !allowed.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", no + 1)));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    /// Reads `file` (if any) and overlays the flags that were given.
    pub fn load(
        allowed: &[&str],
        file: Option<&Path>,
        flags: Vec<(&'static str, Option<String>)>,
    ) -> Result<Self, CliError> {
        let mut values = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                parse_file(&text, allowed)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in flags {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        Ok(Settings { values })
    }

    /// Sets `key` unless a file or flag already did.
    pub fn default(&mut self, key: &str, value: &str) {
        self.values.entry(key.to_string()).or_insert_with(|| value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| CliError::Usage(format!("invalid value `{v}` for --{key}"))),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize, CliError> {
        self.parsed(key, default)
    }

    pub fn group(&self) -> Result<MarkedGroup, CliError> {
        Ok(MarkedGroup::parse(self.get("group").unwrap_or(DEFAULT_GROUP))?)
    }

    pub fn field(&self) -> Result<Field, CliError> {
        Ok(self.get("field").unwrap_or("Q").parse::<Field>()?)
    }

    /// The input matrix from `--matrix`, `--elem` or `--input`.
    pub fn matrix(&self, group: &MarkedGroup, field: Field) -> Result<GroupRingMatrix, CliError> {
        let given: Vec<&str> = ["elem", "matrix", "input"].into_iter().filter(|k| self.get(k).is_some()).collect();
        let text = match given.as_slice() {
            [] => return Err(CliError::Usage("give one of --elem, --matrix or --input".into())),
            ["input"] => {
                let p = self.get("input").unwrap();
                std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {p}: {e}")))?
            }
            [k] => self.get(k).unwrap().to_string(),
            _ => return Err(CliError::Usage("--elem, --matrix and --input are exclusive".into())),
        };
        let m = GroupRingMatrix::parse(group, field, text.trim())?;
        if given == ["elem"] && (m.rows() != 1 || m.cols() != 1) {
            return Err(CliError::Usage("--elem takes a single element; use --matrix".into()));
        }
        Ok(m)
    }

    /// A single element from `--elem` / `--input`.
    pub fn element(&self, group: &MarkedGroup, field: Field) -> Result<GroupRingElement, CliError> {
        let m = self.matrix(group, field)?;
        if m.rows() != 1 || m.cols() != 1 {
            return Err(CliError::Usage("this command takes a single element".into()));
        }
        Ok(m.get(0, 0).clone())
    }

    /// A strictly increasing, positive, comma-separated stage list.
    pub fn stages(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        let Some(text) = self.get(key) else { return Ok(default.to_vec()) };
        let list = text
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::Usage(format!("invalid list `{text}` for --{key}")))?;
        if list.is_empty() || list[0] == 0 || list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Usage(format!("--{key} must be positive and strictly increasing")));
        }
        Ok(list)
    }

    /// Comma-separated moduli; a vector modulus is written `a:b:…`.
    pub fn moduli(&self, key: &str) -> Result<Option<Vec<Vec<u64>>>, CliError> {
        let Some(text) = self.get(key) else { return Ok(None) };
        let list = text
            .split(',')
            .map(|entry| entry.split(':').map(|s| s.trim().parse::<u64>()).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::Usage(format!("invalid moduli `{text}` for --{key}")))?;
        if list.is_empty() || list.iter().any(Vec::is_empty) {
            return Err(CliError::Usage(format!("--{key} is empty")));
        }
        Ok(Some(list))
    }

    /// ε ∈ (0, 1), exact.
    pub fn eps(&self, default: &str) -> Result<BigRational, CliError> {
        let text = self.get("eps").unwrap_or(default);
        let eps = parse_rational(text).map_err(|_| CliError::Usage(format!("invalid --eps `{text}`")))?;
        let zero = BigRational::from_integer(0.into());
        let one = BigRational::from_integer(1.into());
        if eps <= zero || eps >= one {
            return Err(CliError::Usage("--eps must lie strictly between 0 and 1".into()));
        }
        Ok(eps)
    }

    /// Box sides written `20x20`.
    pub fn dims(text: &str) -> Result<Vec<u64>, CliError> {
        text.split('x')
            .map(|s| s.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::Usage(format!("invalid box `{text}`")))
    }

    /// Window s: `r` (default), `r+1` / `strict`, or an explicit number.
    pub fn window(&self, radius: usize) -> Result<usize, CliError> {
        match self.get("window").unwrap_or("r") {
            "r" => Ok(foelner_rank::rank::default_window(radius, false)),
            "r+1" | "strict" => Ok(foelner_rank::rank::default_window(radius, true)),
            v => v.parse().map_err(|_| CliError::Usage(format!("invalid --window `{v}`"))),
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.parsed("seed", 0)
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.values.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect())
    }
}
