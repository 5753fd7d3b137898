//! Plain-text `key = value` configuration shared by `run` and `sweep`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Every accepted key with its default, as shown by `--help` and the README.
pub const KEYS: &[(&str, &str)] = &[
    ("problem", "required: collision | fourrooms | hv_fourrooms"),
    ("algo", "run: required; sweep: every algorithm valid for the problem"),
    ("alpha", "run: required; sweep: 2^-18 ... 2^0"),
    ("alpha_h", "run: required for gradient methods; sweep: 0.01 * 4^k, k=0..7"),
    ("lambda", "run: 0; sweep: 0,0.9"),
    ("beta", "run: 0; sweep: 0,0.2,...,1"),
    ("zeta", "run: 0; sweep: 0,0.9"),
    ("c_bar", "1"),
    ("runs", "10 (50 with paper_scale)"),
    ("steps", "20000 for collision, 50000 otherwise"),
    ("eval_every", "10 (1 with paper_scale)"),
    ("seed", "0"),
    ("output", "results"),
    ("cutoff", "100"),
    ("rho_placement", "full"),
    ("trace_form", "inside"),
    ("paper_scale", "false"),
    ("baselines", "sweep only: none; any of lstd,lsetd,lsaltd"),
];

fn canonical(key: &str) -> String {
    let k = key.trim().replace('-', "_");
    match k.as_str() {
        "algorithm" => "algo".into(),
        "base_seed" => "seed".into(),
        _ => k,
    }
}

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got `{line}`", n + 1))?;
            cfg.set(k, v.trim()).with_context(|| format!("line {}", n + 1))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = canonical(key);
        if !KEYS.iter().any(|(k, _)| *k == key) {
            bail!("unknown config key `{key}`");
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("invalid value `{v}` for `{key}`: {e}")))
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or_else(|| anyhow!("missing required key `{key}`"))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        let item = item.trim();
                        item.parse::<T>().map_err(|e| anyhow!("invalid value `{item}` for `{key}`: {e}"))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}
