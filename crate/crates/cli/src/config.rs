//! Run configuration: defaults, optional JSON file, command-line overrides.

use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

/// Tolerances understood by the commands, with defaults.
pub const DEFAULT_TOLERANCES: [(&str, f64); 6] = [
    // |P(z, j(z))| or |j(z) - p(z)| accepted for a witness
    ("residual", 1e-8),
    // entrywise distance to a rational matrix in the Hodge check
    ("hodge", 1e-12),
    // |a tau^2 + b tau + c| in the quadratic-point search
    ("special", 1e-6),
    // distance to the distinguished boundary
    ("shilov", 1e-12),
    // relative residual of j inversion
    ("invert", 1e-9),
    // largest rounding gap of class polynomial coefficients
    ("classpoly_gap", 0.1),
];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub truncation: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub orbit_depth: usize,
    pub height: i64,
    pub coef_bound: i64,
    pub output_path: Option<String>,
    pub seed: u64,
    pub hodge_denom_bound: i64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            truncation: 60,
            tolerances: DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            orbit_depth: 30,
            height: 10,
            coef_bound: 100,
            output_path: None,
            seed: 0,
            hodge_denom_bound: 1_000_000,
        }
    }
}

impl RunConfig {
    /// Reads a JSON file; tolerances it names replace the defaults one by one.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        let mut tolerances = RunConfig::default().tolerances;
        tolerances.append(&mut cfg.tolerances);
        cfg.tolerances = tolerances;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.truncation < 10 {
            return Err(format!("truncation must be at least 10, got {}", self.truncation));
        }
        for (k, v) in &self.tolerances {
            if !DEFAULT_TOLERANCES.iter().any(|(name, _)| name == k) {
                return Err(format!("unknown tolerance {k:?}"));
            }
            if !(*v > 0.0) || !v.is_finite() {
                return Err(format!("tolerance {k} must be positive, got {v}"));
            }
        }
        if self.orbit_depth == 0 || self.height < 1 || self.coef_bound < 1 || self.hodge_denom_bound < 1 {
            return Err("orbit_depth, height, coef_bound and hodge_denom_bound must be positive".into());
        }
        Ok(())
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_merge_with_defaults() {
        let dir = std::env::temp_dir().join(format!("shilov-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"height": 25, "tolerances": {"residual": 1e-10}}"#).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.height, 25);
        assert_eq!(cfg.tol("residual"), 1e-10);
        assert_eq!(cfg.tol("hodge"), 1e-12);
        assert!(cfg.validate().is_ok());
        std::fs::write(&path, r#"{"heigth": 25}"#).unwrap();
        assert!(RunConfig::load(&path).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.truncation = 9;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.tolerances.insert("residual".into(), 0.0);
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.tolerances.insert("bogus".into(), 1.0);
        assert!(cfg.validate().is_err());
    }
}
