//! Run configuration for scans.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bp::Theorem2Config;
use crate::entangle::SolverConfig;
use crate::error::{io_err, Error, Result};
use crate::hilbert::pauli;
use crate::kernels::{LrParams, QuadConfig};
use crate::lr::{FitConfig, SampleConfig};
use crate::model::{Geometry, ModelSpec};
use crate::qcorr::SearchConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Qc,
    Skew,
    Fisher,
    Ppt,
    Bp,
    Lr,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Qc, Suite::Skew, Suite::Fisher, Suite::Ppt, Suite::Bp, Suite::Lr];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Qc => "qc",
            Suite::Skew => "skew",
            Suite::Fisher => "fisher",
            Suite::Ppt => "ppt",
            Suite::Bp => "bp",
            Suite::Lr => "lr",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}' (expected one of qc, skew, fisher, ppt, bp, lr)")))
    }

    /// Comma-separated list; an empty string selects nothing.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        let mut v: Vec<Suite> = s.split(',').filter(|x| !x.trim().is_empty()).map(Suite::parse).collect::<Result<_>>()?;
        v.sort();
        v.dedup();
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// A pair of Pauli words placed on A and B. A single letter is repeated over the region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub name: String,
    pub a: String,
    pub b: String,
}

impl ObservableSpec {
    pub fn word_for(w: &str, len: usize) -> Result<String> {
        let w = w.trim().to_ascii_uppercase();
        let out = if w.chars().count() == 1 { w.repeat(len) } else { w };
        if out.chars().count() != len {
            return Err(Error::Config(format!("Pauli word '{out}' does not match a region of {len} sites")));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionPair {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpSuiteConfig {
    /// Buffer width of each belief-propagation cut.
    #[serde(default = "one")]
    pub ell: usize,
    #[serde(default)]
    pub pipeline: Theorem2Config,
}

impl Default for BpSuiteConfig {
    fn default() -> Self {
        Self { ell: 1, pipeline: Theorem2Config::default() }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrSetup {
    /// Use these parameters instead of fitting.
    #[serde(default)]
    pub pinned: Option<LrParams>,
    #[serde(default)]
    pub samples: SampleConfig,
    #[serde(default)]
    pub fit: FitConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub betas: Vec<f64>,
    #[serde(default = "default_observables")]
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub pairs: Vec<RegionPair>,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub quad: QuadConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub bp: BpSuiteConfig,
    #[serde(default)]
    pub lr: LrSetup,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
    /// Largest Hilbert-space dimension a scan may diagonalize.
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn one() -> usize {
    1
}
fn default_max_dim() -> usize {
    4096
}
fn default_alphas() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}
fn default_observables() -> Vec<ObservableSpec> {
    vec![ObservableSpec { name: "zz".into(), a: "Z".into(), b: "Z".into() }]
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

/// First 16 hex digits of the SHA-256 of a value's JSON form.
pub fn short_hash<T: Serialize>(v: &T) -> String {
    let s = serde_json::to_string(v).unwrap_or_default();
    sha256_hex(s.as_bytes())[..16].to_string()
}

impl RunConfig {
    /// A small TFI chain configuration with all suites except bp.
    pub fn example(n: usize) -> Self {
        let pairs = (2..n.min(8)).map(|r| RegionPair { a: vec![0], b: vec![r] }).collect();
        Self {
            model: ModelSpec::tfi_chain(n, 1.0, 1.0),
            betas: vec![0.5, 1.0],
            observables: default_observables(),
            pairs,
            suites: vec![Suite::Qc, Suite::Skew, Suite::Fisher, Suite::Ppt, Suite::Lr],
            alphas: default_alphas(),
            quad: QuadConfig::default(),
            solver: SolverConfig::default(),
            search: SearchConfig::default(),
            bp: BpSuiteConfig::default(),
            lr: LrSetup::default(),
            seed: 0,
            out_dir: None,
            max_dim: default_max_dim(),
            workers: 1,
            formats: default_formats(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.to_json().as_bytes())
    }

    pub fn n_sites(&self) -> usize {
        match self.model.geometry {
            Geometry::Chain { n, .. } => n,
            Geometry::Grid { lx, ly, .. } => lx * ly,
        }
    }

    /// Semantic checks beyond the schema.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        let bad = |m: String| Err(Error::Config(m));
        if n == 0 {
            return bad("model has no sites".into());
        }
        if self.betas.is_empty() && !self.suites.is_empty() && self.suites != [Suite::Lr] {
            return bad("betas must not be empty".into());
        }
        for &b in &self.betas {
            if !(b > 0.0) || !b.is_finite() {
                return bad(format!("beta {b} must be positive and finite"));
            }
        }
        if self.suites.contains(&Suite::Bp) && self.betas.iter().any(|&b| b > 4.0) {
            return bad("the bp suite caps beta at 4".into());
        }
        for &a in &self.alphas {
            if !(0.0..=1.0).contains(&a) {
                return bad(format!("alpha {a} outside [0, 1]"));
            }
        }
        for (i, p) in self.pairs.iter().enumerate() {
            if p.a.is_empty() || p.b.is_empty() {
                return bad(format!("pair {i}: empty region"));
            }
            if p.a.iter().chain(&p.b).any(|&s| s >= n) {
                return bad(format!("pair {i}: site index out of range for {n} sites"));
            }
            if p.a.iter().any(|s| p.b.contains(s)) {
                return bad(format!("pair {i}: regions overlap"));
            }
            let mut a = p.a.clone();
            a.sort();
            a.dedup();
            let mut b = p.b.clone();
            b.sort();
            b.dedup();
            if a.len() != p.a.len() || b.len() != p.b.len() {
                return bad(format!("pair {i}: repeated sites"));
            }
        }
        let mut names: Vec<&str> = self.observables.iter().map(|o| o.name.as_str()).collect();
        names.sort();
        names.dedup();
        if names.len() != self.observables.len() {
            return bad("observable names must be unique".into());
        }
        for o in &self.observables {
            if o.name.is_empty() || o.name.contains([',', ';', '"', '\n']) {
                return bad(format!("observable name '{}' must be non-empty without , ; or quotes", o.name));
            }
            for w in [&o.a, &o.b] {
                if w.is_empty() || w.chars().any(|c| pauli::by_name(c.to_ascii_uppercase()).is_none()) {
                    return bad(format!("observable '{}': '{w}' is not a Pauli word", o.name));
                }
            }
            for p in &self.pairs {
                ObservableSpec::word_for(&o.a, p.a.len())?;
                ObservableSpec::word_for(&o.b, p.b.len())?;
            }
        }
        if self.max_dim == 0 {
            return bad("max_dim must be positive".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if let Some(p) = &self.lr.pinned {
            if [p.c, p.v, p.mu].iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return bad("pinned Lieb-Robinson parameters must be positive".into());
            }
        }
        if self.bp.ell == 0 {
            return bad("bp.ell must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_round_trips() {
        let c = RunConfig::example(6);
        let s = c.to_json();
        let back = RunConfig::from_json(&s).unwrap();
        assert_eq!(back.to_json(), s);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&RunConfig::example(4).to_json()).unwrap();
        v["colour"] = serde_json::json!(3);
        assert!(matches!(RunConfig::from_json(&v.to_string()), Err(Error::Config(_))));
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let s = r#"{"model": {"preset": "tfi", "geometry": {"kind": "chain", "n": 4}}, "betas": [1.0]}"#;
        let c = RunConfig::from_json(s).unwrap();
        assert_eq!(c.alphas.len(), 5);
        assert_eq!(c.observables[0].name, "zz");
        assert!(c.suites.is_empty());
    }

    #[test]
    fn suite_lists_parse() {
        assert_eq!(Suite::parse_list("skew, qc,qc").unwrap(), vec![Suite::Qc, Suite::Skew]);
        assert!(Suite::parse_list("").unwrap().is_empty());
        assert!(Suite::parse_list("qc,nope").is_err());
    }

    #[test]
    fn bad_pairs_rejected() {
        let mut c = RunConfig::example(4);
        c.pairs = vec![RegionPair { a: vec![0], b: vec![0] }];
        assert!(c.validate().is_err());
        c.pairs = vec![RegionPair { a: vec![0], b: vec![9] }];
        assert!(c.validate().is_err());
        c.pairs = vec![RegionPair { a: vec![0, 1], b: vec![3] }];
        c.observables = vec![ObservableSpec { name: "x".into(), a: "XZZ".into(), b: "Z".into() }];
        assert!(c.validate().is_err());
    }
}
