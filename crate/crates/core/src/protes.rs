//! Probabilistic tensor sampling optimizer over a discrete parameter grid.
//!
//! Each iteration samples `K` multi-indices from a tensor-train
//! distribution, evaluates the black-box objective on the distinct ones,
//! keeps the `k` lowest values as elites and raises their log-likelihood
//! with `k_gd` plain gradient-ascent steps of rate `lambda`. The loop runs
//! while a full batch still fits in the evaluation budget `m`; only unique
//! evaluations within a batch are charged.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simulator::{ParameterVector, SimError};
use crate::tt::{MultiIndex, TtDistribution, TtError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtesError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("budget m = {budget} is smaller than one batch of K = {batch} samples")]
    BudgetTooSmall { budget: usize, batch: usize },
    #[error("objective returned {value} at index {index:?}")]
    NonFinite { index: Vec<usize>, value: f64 },
    #[error(transparent)]
    Tt(#[from] TtError),
}

/// Optimizer hyperparameters. Serialized with the short key names used in
/// config files (`R`, `K`, `k`, `k_gd`, `lambda`, `N`, `m`, `seed`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtesConfig {
    #[serde(rename = "R")]
    pub rank: usize,
    #[serde(rename = "K")]
    pub samples: usize,
    #[serde(rename = "k")]
    pub elites: usize,
    #[serde(rename = "k_gd")]
    pub gd_steps: usize,
    #[serde(rename = "lambda")]
    pub learning_rate: f64,
    #[serde(rename = "N")]
    pub nodes: usize,
    #[serde(rename = "m")]
    pub budget: usize,
    pub seed: u64,
}

impl Default for ProtesConfig {
    fn default() -> Self {
        Self {
            rank: 5,
            samples: 20,
            elites: 10,
            gd_steps: 5,
            learning_rate: 0.05,
            nodes: 100,
            budget: 1000,
            seed: 0,
        }
    }
}

impl ProtesConfig {
    pub fn validate(&self) -> Result<(), ProtesError> {
        let fail = |m: &str| Err(ProtesError::InvalidConfig(m.to_string()));
        if self.elites == 0 || self.elites > self.samples {
            return fail("need 1 <= k <= K");
        }
        if self.nodes < 2 {
            return fail("need N >= 2");
        }
        if self.rank == 0 {
            return fail("need R >= 1");
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return fail("need lambda > 0");
        }
        if self.budget < self.samples {
            return Err(ProtesError::BudgetTooSmall { budget: self.budget, batch: self.samples });
        }
        Ok(())
    }
}

/// Uniform grid over `[0, 2pi)^d` with `N` nodes per axis. Axes are ordered
/// `(gamma_1..gamma_p, beta_1..beta_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParameterGrid {
    pub dims: usize,
    pub nodes: usize,
}

impl ParameterGrid {
    pub fn new(dims: usize, nodes: usize) -> Self {
        Self { dims, nodes }
    }

    pub fn for_depth(p: usize, nodes: usize) -> Self {
        Self::new(2 * p, nodes)
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        TAU * i as f64 / self.nodes as f64
    }

    pub fn index_to_flat(&self, idx: &MultiIndex) -> Vec<f64> {
        idx.as_slice().iter().map(|&i| self.node(i)).collect()
    }

    pub fn index_to_params(&self, idx: &MultiIndex) -> Result<ParameterVector, SimError> {
        ParameterVector::from_flat(&self.index_to_flat(idx))
    }
}

/// Distinct indices of a batch and, for every sample, the slot holding its value.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationPlan {
    pub unique: Vec<MultiIndex>,
    pub slots: Vec<usize>,
}

impl EvaluationPlan {
    /// Values per sample, in batch order.
    pub fn expand(&self, unique_values: &[f64]) -> Vec<f64> {
        self.slots.iter().map(|&s| unique_values[s]).collect()
    }
}

/// Groups repeated indices so each distinct one is evaluated once, in
/// order of first appearance.
pub fn duplicate_policy(samples: &[MultiIndex]) -> EvaluationPlan {
    let mut seen: HashMap<&MultiIndex, usize> = HashMap::new();
    let mut unique = Vec::new();
    let slots = samples
        .iter()
        .map(|s| {
            *seen.entry(s).or_insert_with(|| {
                unique.push(s.clone());
                unique.len() - 1
            })
        })
        .collect();
    EvaluationPlan { unique, slots }
}

/// Indices of the `k` smallest values, ties broken by position.
pub fn select_elites(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub evaluations: usize,
    pub best_value: f64,
    pub best_index: Vec<usize>,
    pub batch_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationTrace {
    pub iterations: Vec<IterationRecord>,
    pub best_index: Vec<usize>,
    pub best_value: f64,
    pub evaluations: usize,
    pub uniform_fallbacks: usize,
    pub clamped_entries: usize,
}

impl OptimizationTrace {
    pub fn best(&self) -> MultiIndex {
        MultiIndex::new(self.best_index.clone())
    }

    /// CSV with header `iteration,evals,best_value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,evals,best_value\n");
        for r in &self.iterations {
            s.push_str(&format!("{},{},{}\n", r.iteration, r.evaluations, r.best_value));
        }
        s
    }
}

/// Minimizes `objective` over `[0, N)^d`.
pub fn optimize<F>(objective: F, d: usize, config: &ProtesConfig) -> Result<OptimizationTrace, ProtesError>
where
    F: Fn(&MultiIndex) -> f64 + Sync,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut tt = TtDistribution::random(d, config.nodes, config.rank, &mut rng)?;

    let mut trace = OptimizationTrace {
        iterations: Vec::new(),
        best_index: Vec::new(),
        best_value: f64::INFINITY,
        evaluations: 0,
        uniform_fallbacks: 0,
        clamped_entries: 0,
    };

    while trace.evaluations + config.samples <= config.budget {
        let (batch, sdiag) = tt.sample_batch(config.samples, &mut rng);
        trace.uniform_fallbacks += sdiag.uniform_fallbacks;

        let plan = duplicate_policy(&batch);
        let unique_values: Vec<f64> = plan.unique.par_iter().map(&objective).collect();
        if let Some((idx, &value)) = plan.unique.iter().zip(&unique_values).find(|(_, v)| !v.is_finite()) {
            return Err(ProtesError::NonFinite { index: idx.as_slice().to_vec(), value });
        }
        trace.evaluations += plan.unique.len();
        let values = plan.expand(&unique_values);

        for (idx, &v) in batch.iter().zip(&values) {
            if v < trace.best_value {
                trace.best_value = v;
                trace.best_index = idx.as_slice().to_vec();
            }
        }

        let elites: Vec<MultiIndex> = select_elites(&values, config.elites)
            .into_iter()
            .map(|i| batch[i].clone())
            .collect();
        let adiag = tt.ascent_step(&elites, config.learning_rate, config.gd_steps)?;
        trace.clamped_entries += adiag.clamped_entries;

        trace.iterations.push(IterationRecord {
            iteration: trace.iterations.len() + 1,
            evaluations: trace.evaluations,
            best_value: trace.best_value,
            best_index: trace.best_index.clone(),
            batch_mean: values.iter().sum::<f64>() / values.len() as f64,
        });
    }
    Ok(trace)
}
