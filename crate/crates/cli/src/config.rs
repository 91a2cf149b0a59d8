//! Run configuration: JSON file values overridden by flags (and environment
//! for threads / output directory), validated before any computation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sturmian::cf::ContinuedFraction;
use sturmian::tracemap::ModelParams;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Diag,
    Offdiag,
}

/// Every knob of every subcommand. Unused fields stay `None` and are left
/// out of the serialized (and hashed) config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cf: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<bool>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tmin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tmax: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_terms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Not hashed: where the files go does not change what is in them.
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

macro_rules! take {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))
    }

    /// Values set in `over` replace ours.
    pub fn override_with(mut self, over: &RunConfig) -> Self {
        take!(self, over, model, l1, l2, cf, k, level, bounds, alpha, size, tmin, tmax, times, bound, tol,
            d_terms, xi_grid, seed, threads, format, out_dir);
        self
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Compact JSON of the resolved config, and its SHA-256.
    pub fn canonical(&self) -> (String, String) {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut hex = String::with_capacity(64);
        for b in digest.iter() {
            write!(hex, "{b:02x}").expect("writing to a string");
        }
        (json, hex)
    }

    /// Parses the cf spec; `random` without a seed takes `seed`.
    pub fn continued_fraction(&self) -> Result<ContinuedFraction, CliError> {
        let spec = self.cf.as_deref().unwrap_or("golden");
        let spec = if spec == "random" { format!("random:{}", self.seed.unwrap_or(0)) } else { spec.to_string() };
        spec.parse().map_err(|e| CliError::Validation(format!("bad --cf {spec:?}: {e}")))
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let model = self.model.ok_or_else(|| CliError::Validation("--model is required".into()))?;
        let l1 = self.l1.ok_or_else(|| CliError::Validation("--l1 is required".into()))?;
        let r = match model {
            ModelName::Diag => ModelParams::diagonal(l1),
            ModelName::Offdiag => {
                let l2 = self.l2.ok_or_else(|| CliError::Validation("--l2 is required for offdiag".into()))?;
                ModelParams::offdiagonal(l1, l2)
            }
        };
        r.map_err(CliError::from)
    }

    pub fn check_common(&self) -> Result<(), CliError> {
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(CliError::Validation("threads must be >= 1".into()));
            }
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(CliError::Validation(format!("tol must lie in (0, 1), got {tol}")));
            }
        }
        Ok(())
    }
}

/// "a:b:step" → a, a+step, …, ≤ b.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Validation(format!("grid {s:?} is not of the form a:b:step"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(CliError::Validation(format!("grid {s:?} has too many points")));
    }
    Ok((0..=n).map(|i| a + step * i as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_and_hash() {
        let file = RunConfig { l1: Some(3.0), level: Some(4), ..Default::default() };
        let flags = RunConfig { level: Some(6), ..Default::default() };
        let c = file.override_with(&flags);
        assert_eq!(c.l1, Some(3.0));
        assert_eq!(c.level, Some(6));
        let (json, h1) = c.canonical();
        assert_eq!(json, r#"{"l1":3.0,"level":6}"#);
        let (_, h2) = c.clone().override_with(&RunConfig { out_dir: Some("x".into()), ..Default::default() }).canonical();
        assert_eq!(h1, h2);
        assert_eq!(h1.len(), 64);
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("8:40:1").unwrap().len(), 33);
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"lambda": 3}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"L": 101, "format": "json"}"#).unwrap();
        assert_eq!(c.size, Some(101));
        assert_eq!(c.format(), Format::Json);
    }
}
