//! Default multiplication parameters derived from cache sizes.
//!
//! - The Strassen-Winograd cutoff is the largest multiple of 64 such that two
//!   square `cutoff x cutoff` bit matrices fit in L2.
//! - The M4RM row block is half the cutoff.
//! - The table width starts at `floor(0.75 log2 b_s) - 2` and drops by one
//!   more when that alone brings all tables into L1.
//! - Eight tables are used.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graycode::{CombinationTable, MAX_K};
use crate::m4rm::DEFAULT_TABLES;
use crate::strassen::MulParams;

pub const DEFAULT_L1_BYTES: usize = 32 * 1024;
pub const DEFAULT_L2_BYTES: usize = 1024 * 1024;

/// Environment variable naming a `key=value` configuration file.
pub const CONFIG_ENV: &str = "GF2MAT_CONFIG";

pub fn default_params(l1_bytes: usize, l2_bytes: usize) -> Result<MulParams> {
    if l1_bytes == 0 || l2_bytes == 0 {
        return Err(Error::param("cache sizes must be positive"));
    }
    // 2 * c^2 / 8 <= l2  <=>  c <= sqrt(4 * l2)
    let max_c = (4 * l2_bytes as u64).isqrt() as usize;
    let cutoff = max_c / 64 * 64;
    if cutoff < 64 {
        return Err(Error::param(format!("L2 size {l2_bytes} bytes cannot hold two 64x64 matrices")));
    }
    let b_s = cutoff / 2;
    let t = DEFAULT_TABLES;
    let k = choose_k(b_s, l1_bytes, t, cutoff);
    Ok(MulParams { cutoff, b_s, k, t, l1_bytes, l2_bytes })
}

/// Table width for row blocks of `b_s`, `t` tables of `ncols` columns and an
/// L1 cache of `l1_bytes`. Result is clamped to `1..=16`.
pub fn choose_k(b_s: usize, l1_bytes: usize, t: usize, ncols: usize) -> usize {
    let b_s = b_s.max(2);
    let k0 = (0.75 * (b_s as f64).log2()).floor() as i64 - 2;
    let fits = |k: i64| k >= 1 && CombinationTable::footprint(t, k as usize, ncols) <= l1_bytes;
    let k = if k0 > 1 && k0 <= MAX_K as i64 && !fits(k0) && fits(k0 - 1) { k0 - 1 } else { k0 };
    k.clamp(1, MAX_K as i64) as usize
}

/// Parameter overrides from a config file or the command line. Absent keys
/// fall back to values derived by [`default_params`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    pub l1_bytes: Option<usize>,
    pub l2_bytes: Option<usize>,
    pub cutoff: Option<usize>,
    pub bs: Option<usize>,
    pub k: Option<usize>,
    pub t: Option<usize>,
}

impl Config {
    /// Parses `key=value` lines. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        let mut seen = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::param(format!("config line {}: expected key=value", lineno + 1)))?;
            let key = key.trim();
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::param(format!("config line {}: `{}` is not an integer", lineno + 1, value.trim())))?;
            let slot = match key {
                "l1_bytes" => &mut cfg.l1_bytes,
                "l2_bytes" => &mut cfg.l2_bytes,
                "cutoff" => &mut cfg.cutoff,
                "bs" => &mut cfg.bs,
                "k" => &mut cfg.k,
                "t" => &mut cfg.t,
                other => return Err(Error::param(format!("config line {}: unknown key `{other}`", lineno + 1))),
            };
            if seen.insert(key.to_string(), lineno).is_some() {
                return Err(Error::param(format!("config line {}: duplicate key `{key}`", lineno + 1)));
            }
            *slot = Some(value);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Config::parse(&text)
    }

    /// Config named by `GF2MAT_CONFIG`, or empty when unset.
    pub fn from_env() -> Result<Config> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Config::load(Path::new(&p)),
            _ => Ok(Config::default()),
        }
    }

    /// Keys set in `over` replace those in `self`.
    pub fn merge(self, over: Config) -> Config {
        Config {
            l1_bytes: over.l1_bytes.or(self.l1_bytes),
            l2_bytes: over.l2_bytes.or(self.l2_bytes),
            cutoff: over.cutoff.or(self.cutoff),
            bs: over.bs.or(self.bs),
            k: over.k.or(self.k),
            t: over.t.or(self.t),
        }
    }

    pub fn resolve(&self) -> Result<MulParams> {
        let l1 = self.l1_bytes.unwrap_or(DEFAULT_L1_BYTES);
        let l2 = self.l2_bytes.unwrap_or(DEFAULT_L2_BYTES);
        let mut p = default_params(l1, l2)?;
        if let Some(c) = self.cutoff {
            p.cutoff = c;
            p.b_s = (c / 2).max(1);
        }
        if let Some(bs) = self.bs {
            p.b_s = bs;
        }
        if let Some(t) = self.t {
            p.t = t;
        }
        p.k = match self.k {
            Some(k) => k,
            None if self.cutoff.is_some() || self.bs.is_some() || self.t.is_some() => {
                choose_k(p.b_s, p.l1_bytes, p.t, p.cutoff)
            }
            None => p.k,
        };
        p.validate()?;
        Ok(p)
    }
}
