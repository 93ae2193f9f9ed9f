//! Resource bounds shared by enumeration, evaluation and the oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest n accepted by partition enumeration.
    pub max_partition_n: usize,
    /// Largest n accepted by full enumeration of splitting filtrations.
    pub max_filtration_n: usize,
    /// Largest n for which orbits are computed by running over all of S_n.
    pub max_orbit_n: usize,
    /// log2 of the number of digit matrices the exact oracle may visit.
    pub enumeration_budget_bits: u32,
    /// Truncation tolerance for infinite root series.
    pub series_tolerance: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_partition_n: 10,
            max_filtration_n: 7,
            max_orbit_n: 8,
            enumeration_budget_bits: 24,
            series_tolerance: 1e-14,
        }
    }
}

impl Limits {
    /// Parses `key=value` lines; `#` starts a comment. Unknown keys are errors.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut limits = Limits::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("config line {}: expected key=value", lineno + 1)))?;
            limits.set(key.trim(), value.trim())?;
        }
        Ok(limits)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::parse(format!("config key {key}: invalid value {value:?}"));
        match key {
            "max_partition_n" => self.max_partition_n = value.parse().map_err(|_| bad())?,
            "max_filtration_n" => self.max_filtration_n = value.parse().map_err(|_| bad())?,
            "max_orbit_n" => self.max_orbit_n = value.parse().map_err(|_| bad())?,
            "enumeration_budget_bits" => {
                self.enumeration_budget_bits = value.parse().map_err(|_| bad())?
            }
            "series_tolerance" => {
                let t: f64 = value.parse().map_err(|_| bad())?;
                if !(t > 0.0) {
                    return Err(bad());
                }
                self.series_tolerance = t;
            }
            _ => return Err(Error::parse(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub(crate) fn check(what: &'static str, requested: usize, bound: usize) -> Result<()> {
        if requested > bound {
            return Err(Error::SizeLimit {
                what,
                requested: requested as u64,
                bound: bound as u64,
            });
        }
        Ok(())
    }
}
