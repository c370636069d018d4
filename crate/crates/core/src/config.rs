//! Flat `key = value` configuration covering the optimizer and refiner.
//!
//! Recognized keys: `R`, `K`, `k`, `k_gd`, `lambda`, `N`, `m`, `seed`,
//! `max_evals`, `initial_step`, `tol`. Keys are case sensitive, `#` starts
//! a comment, and missing keys keep their defaults. `seed` applies to both
//! stages.

use serde::Deserialize;
use thiserror::Error;

use crate::protes::ProtesConfig;
use crate::refine::RefineConfig;

#[derive(Debug, Error)]
#[error("config: {0}")]
pub struct ConfigError(String);

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "R")]
    rank: Option<usize>,
    #[serde(rename = "K")]
    samples: Option<usize>,
    #[serde(rename = "k")]
    elites: Option<usize>,
    k_gd: Option<usize>,
    lambda: Option<f64>,
    #[serde(rename = "N")]
    nodes: Option<usize>,
    m: Option<usize>,
    seed: Option<u64>,
    max_evals: Option<usize>,
    initial_step: Option<f64>,
    tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineConfig {
    pub protes: ProtesConfig,
    pub refine: RefineConfig,
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(e.message().to_string()))?;
        let mut cfg = Self::default();
        let p = &mut cfg.protes;
        let r = &mut cfg.refine;
        if let Some(v) = raw.rank {
            p.rank = v;
        }
        if let Some(v) = raw.samples {
            p.samples = v;
        }
        if let Some(v) = raw.elites {
            p.elites = v;
        }
        if let Some(v) = raw.k_gd {
            p.gd_steps = v;
        }
        if let Some(v) = raw.lambda {
            p.learning_rate = v;
        }
        if let Some(v) = raw.nodes {
            p.nodes = v;
        }
        if let Some(v) = raw.m {
            p.budget = v;
        }
        if let Some(v) = raw.seed {
            p.seed = v;
            r.seed = v;
        }
        if let Some(v) = raw.max_evals {
            r.max_evals = v;
        }
        if let Some(v) = raw.initial_step {
            r.initial_step = v;
        }
        if let Some(v) = raw.tol {
            r.tol = v;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let text = "# larger run\nR = 4\nK = 200\nk = 20\nk_gd = 3\nlambda = 0.1\nN = 50\nm = 5000\nseed = 9\nmax_evals = 1000000\ninitial_step = 0.2\ntol = 1e-8\n";
        let cfg = PipelineConfig::parse(text).unwrap();
        assert_eq!(
            cfg.protes,
            ProtesConfig { rank: 4, samples: 200, elites: 20, gd_steps: 3, learning_rate: 0.1, nodes: 50, budget: 5000, seed: 9 }
        );
        assert_eq!(cfg.refine, RefineConfig { max_evals: 1_000_000, initial_step: 0.2, tol: 1e-8, seed: 9 });
    }

    #[test]
    fn defaults_and_errors() {
        assert_eq!(PipelineConfig::parse("").unwrap(), PipelineConfig::default());
        assert!(PipelineConfig::parse("rank = 3").is_err());
        assert!(PipelineConfig::parse("K = -1").is_err());
        assert!(PipelineConfig::parse("K = ").is_err());
    }
}
