//! Run configuration: parameter caps, worker count, verification mode.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How polynomial identities are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Full symbolic equality of both sides (the default).
    #[default]
    Symbolic,
    /// Equality at (deg+1) integer points per variable; equally conclusive
    /// for polynomial identities, cheaper on memory.
    Sampled,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Cap on the cyclotomic order M used by identity checks.
    pub order_cap: u64,
    /// Cap on M for periodicity scans.
    pub scan_m_cap: u64,
    /// Cap on the generating-polynomial level p.
    pub p_cap: u64,
    /// Cap on the number of nested summations r.
    pub r_cap: u64,
    /// Worker threads for scans and batch verification; 0 = library default.
    pub worker_count: usize,
    /// Default output path for batch commands.
    pub output_path: Option<PathBuf>,
    pub mode: Mode,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            order_cap: crate::cyclotomic::DEFAULT_ORDER_CAP,
            scan_m_cap: 20,
            p_cap: 3,
            r_cap: 3,
            worker_count: 0,
            output_path: None,
            mode: Mode::default(),
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.order_cap < 2 {
            return Err(Error::InvalidParameters(format!(
                "order cap must be at least 2, got {}",
                self.order_cap
            )));
        }
        if self.scan_m_cap < 2 {
            return Err(Error::InvalidParameters(format!(
                "scan M cap must be at least 2, got {}",
                self.scan_m_cap
            )));
        }
        if self.r_cap < 1 {
            return Err(Error::InvalidParameters(
                "r cap must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let cfg = Config::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.order_cap, 64);
        assert_eq!(cfg.scan_m_cap, 20);
        assert_eq!(cfg.mode, Mode::Symbolic);
    }

    #[test]
    fn bad_caps_rejected() {
        let cfg = Config { order_cap: 1, ..Config::default() };
        assert!(cfg.validate().is_err());
        let cfg = Config { r_cap: 0, ..Config::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_roundtrip() {
        let cfg = Config { p_cap: 2, mode: Mode::Sampled, ..Config::default() };
        let json = serde_json::to_string(&cfg).unwrap();
        let back: Config = serde_json::from_str(&json).unwrap();
        assert_eq!(back.p_cap, 2);
        assert_eq!(back.mode, Mode::Sampled);
        // partial configs fill remaining fields with defaults
        let partial: Config = serde_json::from_str(r#"{"scan_m_cap": 12}"#).unwrap();
        assert_eq!(partial.scan_m_cap, 12);
        assert_eq!(partial.order_cap, 64);
    }
}
