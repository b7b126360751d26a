//! INI-style configuration shared by the command-line tools.
//!
//! Sections mirror the pipeline stages; every key has a default, so an
//! empty (or absent) file resolves to the stock configuration. Unknown
//! sections or keys are errors — silent typos in experiment configs are
//! worse than loud ones. Command-line flags override file values, which
//! override defaults.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::LatticeConfig;
use crate::spiral::DenseSetConfig;

/// Fully resolved configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub lattice_dx: f64,
    pub lattice_dy: f64,
    pub lattice_headings: usize,
    pub dense_x_min: f64,
    pub dense_x_max: f64,
    pub dense_y_min: f64,
    pub dense_y_max: f64,
    pub dense_kappa_max: f64,
    pub delta: f64,
    pub ingest_window: f64,
    pub ingest_step: f64,
    pub ingest_split: f64,
    pub cluster_k: usize,
    pub learn_lambda: f64,
    pub learn_paths_per_round: usize,
    pub learn_candidates_per_round: usize,
    pub learn_no_improve_rounds: usize,
    pub learn_initial_weight: f64,
    pub learn_weight_alpha: f64,
    pub reduce_factor: f64,
    pub lane_width: f64,
    pub plan_repeat: usize,
}

impl Default for ResolvedConfig {
    fn default() -> Self {
        ResolvedConfig {
            lattice_dx: 0.4,
            lattice_dy: 0.4,
            lattice_headings: 16,
            dense_x_min: 0.4,
            dense_x_max: 4.0,
            dense_y_min: -2.0,
            dense_y_max: 2.0,
            dense_kappa_max: 0.5,
            delta: 0.1,
            ingest_window: 10.0,
            ingest_step: 1.0,
            ingest_split: 0.85,
            cluster_k: 8,
            learn_lambda: 0.311,
            learn_paths_per_round: 8,
            learn_candidates_per_round: 32,
            learn_no_improve_rounds: 3,
            learn_initial_weight: 5.0,
            learn_weight_alpha: 0.5,
            reduce_factor: 1.1,
            lane_width: 3.7,
            plan_repeat: 5,
        }
    }
}

/// Parse INI text into (section, key) -> value. Lines are `key = value`
/// under `[section]` headers; `#` and `;` start comments; blank lines
/// are skipped. Duplicate keys keep the last value.
fn parse_ini(text: &str) -> Result<BTreeMap<(String, String), String>> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find(['#', ';']) {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse(format!(
                "config line {}: expected key = value, got {line:?}",
                lineno + 1
            )));
        };
        if section.is_empty() {
            return Err(Error::Parse(format!(
                "config line {}: key outside any [section]",
                lineno + 1
            )));
        }
        out.insert(
            (section.clone(), key.trim().to_string()),
            value.trim().to_string(),
        );
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("config [{section}] {key}: cannot parse {value:?}")))
}

impl ResolvedConfig {
    /// Defaults overridden by the INI text.
    pub fn from_ini(text: &str) -> Result<Self> {
        let mut cfg = ResolvedConfig::default();
        for ((section, key), value) in parse_ini(text)? {
            let target: &mut dyn std::any::Any = match (section.as_str(), key.as_str()) {
                ("lattice", "dx") => &mut cfg.lattice_dx,
                ("lattice", "dy") => &mut cfg.lattice_dy,
                ("lattice", "headings") => &mut cfg.lattice_headings,
                ("dense", "x_min") => &mut cfg.dense_x_min,
                ("dense", "x_max") => &mut cfg.dense_x_max,
                ("dense", "y_min") => &mut cfg.dense_y_min,
                ("dense", "y_max") => &mut cfg.dense_y_max,
                ("dense", "kappa_max") => &mut cfg.dense_kappa_max,
                ("dense", "delta") => &mut cfg.delta,
                ("ingest", "window") => &mut cfg.ingest_window,
                ("ingest", "step") => &mut cfg.ingest_step,
                ("ingest", "split") => &mut cfg.ingest_split,
                ("cluster", "k") => &mut cfg.cluster_k,
                ("learn", "lambda") => &mut cfg.learn_lambda,
                ("learn", "paths_per_round") => &mut cfg.learn_paths_per_round,
                ("learn", "candidates_per_round") => &mut cfg.learn_candidates_per_round,
                ("learn", "no_improve_rounds") => &mut cfg.learn_no_improve_rounds,
                ("learn", "initial_weight") => &mut cfg.learn_initial_weight,
                ("learn", "weight_alpha") => &mut cfg.learn_weight_alpha,
                ("reduce", "factor") => &mut cfg.reduce_factor,
                ("scenario", "lane_width") => &mut cfg.lane_width,
                ("plan", "repeat") => &mut cfg.plan_repeat,
                _ => {
                    return Err(Error::Parse(format!(
                        "config: unknown key [{section}] {key}"
                    )))
                }
            };
            if let Some(slot) = target.downcast_mut::<f64>() {
                *slot = parse_value(&section, &key, &value)?;
            } else if let Some(slot) = target.downcast_mut::<usize>() {
                *slot = parse_value(&section, &key, &value)?;
            } else {
                unreachable!("config slots are f64 or usize");
            }
        }
        Ok(cfg)
    }

    /// Load from a file path, or defaults when `path` is `None`.
    pub fn load(path: Option<&std::path::Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::File(p.display().to_string(), e))?;
                Self::from_ini(&text)
            }
            None => Ok(Self::default()),
        }
    }

    /// Canonical `section.key = value` listing; the hash input.
    pub fn canonical(&self) -> String {
        format!(
            "cluster.k = {}\n\
             dense.delta = {}\n\
             dense.kappa_max = {}\n\
             dense.x_max = {}\n\
             dense.x_min = {}\n\
             dense.y_max = {}\n\
             dense.y_min = {}\n\
             ingest.split = {}\n\
             ingest.step = {}\n\
             ingest.window = {}\n\
             lattice.dx = {}\n\
             lattice.dy = {}\n\
             lattice.headings = {}\n\
             learn.candidates_per_round = {}\n\
             learn.initial_weight = {}\n\
             learn.lambda = {}\n\
             learn.no_improve_rounds = {}\n\
             learn.paths_per_round = {}\n\
             learn.weight_alpha = {}\n\
             plan.repeat = {}\n\
             reduce.factor = {}\n\
             scenario.lane_width = {}\n",
            self.cluster_k,
            self.delta,
            self.dense_kappa_max,
            self.dense_x_max,
            self.dense_x_min,
            self.dense_y_max,
            self.dense_y_min,
            self.ingest_split,
            self.ingest_step,
            self.ingest_window,
            self.lattice_dx,
            self.lattice_dy,
            self.lattice_headings,
            self.learn_candidates_per_round,
            self.learn_initial_weight,
            self.learn_lambda,
            self.learn_no_improve_rounds,
            self.learn_paths_per_round,
            self.learn_weight_alpha,
            self.plan_repeat,
            self.reduce_factor,
            self.lane_width,
        )
    }

    /// First sixteen hex characters of the SHA-256 of the canonical form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn lattice(&self) -> Result<LatticeConfig> {
        LatticeConfig::with_heading_count(self.lattice_dx, self.lattice_dy, self.lattice_headings)
    }

    pub fn dense(&self) -> Result<DenseSetConfig> {
        Ok(DenseSetConfig {
            lattice: self.lattice()?,
            x_range: [self.dense_x_min, self.dense_x_max],
            y_range: [self.dense_y_min, self.dense_y_max],
            kappa_max: self.dense_kappa_max,
            delta: self.delta,
            ..DenseSetConfig::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_the_defaults() {
        assert_eq!(
            ResolvedConfig::from_ini("").unwrap(),
            ResolvedConfig::default()
        );
    }

    #[test]
    fn values_override_and_comments_are_ignored() {
        let text = "\
# experiment tweak
[learn]
lambda = 0.0311  ; the smaller paper value
[cluster]
k = 12
";
        let cfg = ResolvedConfig::from_ini(text).unwrap();
        assert_eq!(cfg.learn_lambda, 0.0311);
        assert_eq!(cfg.cluster_k, 12);
        assert_eq!(cfg.reduce_factor, 1.1, "untouched keys keep defaults");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ResolvedConfig::from_ini("[learn]\nlamda = 0.3\n").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains("lamda"));
        assert!(ResolvedConfig::from_ini("[larn]\nlambda = 0.3\n").is_err());
    }

    #[test]
    fn keys_need_a_section_and_an_equals_sign() {
        assert!(ResolvedConfig::from_ini("lambda = 3\n").is_err());
        assert!(ResolvedConfig::from_ini("[learn]\nlambda 3\n").is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let base = ResolvedConfig::default().hash();
        assert_eq!(base.len(), 16);
        assert_eq!(base, ResolvedConfig::default().hash());
        let tweaked = ResolvedConfig::from_ini("[learn]\nlambda = 0.0311\n")
            .unwrap()
            .hash();
        assert_ne!(base, tweaked);
    }
}
