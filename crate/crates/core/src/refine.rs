//! Nelder-Mead local refinement on the `2pi`-periodic parameter torus.
//!
//! Points are wrapped into `[0, 2pi)` before every evaluation. When the
//! simplex value spread drops below `tol` and budget remains, the search
//! restarts from the incumbent with a fresh simplex whose axis signs are
//! drawn from the seeded generator; it stops once a restart fails to
//! improve the incumbent by more than `tol`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("invalid refine config: {0}")]
    InvalidConfig(String),
    #[error("objective returned {value} at {point:?}")]
    NonFinite { point: Vec<f64>, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub max_evals: usize,
    pub initial_step: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self { max_evals: 10_000, initial_step: 0.1, tol: 1e-10, seed: 0 }
    }
}

impl RefineConfig {
    pub fn validate(&self, dims: usize) -> Result<(), RefineError> {
        if self.max_evals < dims + 2 {
            return Err(RefineError::InvalidConfig(format!(
                "max_evals = {} is below {} for {dims} parameters",
                self.max_evals,
                dims + 2
            )));
        }
        if !(self.initial_step > 0.0) || !(self.tol > 0.0) {
            return Err(RefineError::InvalidConfig("initial_step and tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefineResult {
    /// Best point, wrapped into `[0, 2pi)`.
    pub theta: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub restarts: usize,
}

fn wrap(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.rem_euclid(TAU)).collect()
}

struct Counter<F> {
    objective: F,
    evals: usize,
    max_evals: usize,
    best: (Vec<f64>, f64),
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    /// `Ok(None)` once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>, RefineError> {
        if self.evals >= self.max_evals {
            return Ok(None);
        }
        let point = wrap(x);
        let value = (self.objective)(&point);
        self.evals += 1;
        if !value.is_finite() {
            return Err(RefineError::NonFinite { point, value });
        }
        if value < self.best.1 {
            self.best = (point, value);
        }
        Ok(Some(value))
    }
}

/// Minimizes `objective` from `start`.
pub fn refine<F>(objective: F, start: &[f64], config: &RefineConfig) -> Result<RefineResult, RefineError>
where
    F: FnMut(&[f64]) -> f64,
{
    let dims = start.len();
    config.validate(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut c = Counter { objective, evals: 0, max_evals: config.max_evals, best: (wrap(start), f64::INFINITY) };
    let start = wrap(start);
    let f0 = c.eval(&start)?.expect("budget validated");
    c.best = (start.clone(), f0);

    let mut restarts = 0;
    let mut signs = vec![1.0; dims];
    loop {
        let before = c.best.1;
        let origin = c.best.0.clone();
        if !search(&mut c, &origin, before, &signs, config)? || c.evals >= c.max_evals {
            break;
        }
        if restarts > 0 && before - c.best.1 <= config.tol {
            break;
        }
        restarts += 1;
        signs = (0..dims).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    }
    Ok(RefineResult { theta: c.best.0, value: c.best.1, evals: c.evals, restarts })
}

/// One Nelder-Mead run. Returns `false` when the budget ran out.
fn search<F: FnMut(&[f64]) -> f64>(
    c: &mut Counter<F>,
    origin: &[f64],
    origin_value: f64,
    signs: &[f64],
    config: &RefineConfig,
) -> Result<bool, RefineError> {
    let dims = origin.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dims + 1);
    simplex.push((origin.to_vec(), origin_value));
    for j in 0..dims {
        let mut x = origin.to_vec();
        x[j] += signs[j] * config.initial_step;
        let Some(f) = c.eval(&x)? else { return Ok(false) };
        simplex.push((x, f));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (f_best, f_worst) = (simplex[0].1, simplex[dims].1);
        if f_worst - f_best <= config.tol {
            return Ok(true);
        }
        let centroid: Vec<f64> = (0..dims)
            .map(|j| simplex[..dims].iter().map(|(x, _)| x[j]).sum::<f64>() / dims as f64)
            .collect();
        let toward = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, x)| c + coef * (x - c)).collect()
        };
        let worst = simplex[dims].0.clone();
        let reflected = toward(-REFLECT, &worst);
        let Some(fr) = c.eval(&reflected)? else { return Ok(false) };

        if fr < f_best {
            let expanded = toward(-REFLECT * EXPAND, &worst);
            let Some(fe) = c.eval(&expanded)? else { return Ok(false) };
            simplex[dims] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dims - 1].1 {
            simplex[dims] = (reflected, fr);
            continue;
        }
        let outside = fr < f_worst;
        let contracted = if outside {
            toward(-REFLECT * CONTRACT, &worst)
        } else {
            toward(CONTRACT, &worst)
        };
        let Some(fc) = c.eval(&contracted)? else { return Ok(false) };
        if (outside && fc <= fr) || (!outside && fc < f_worst) {
            simplex[dims] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = anchor.iter().zip(&vertex.0).map(|(a, x)| a + SHRINK * (x - a)).collect();
            let Some(f) = c.eval(&x)? else { return Ok(false) };
            *vertex = (x, f);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(center: Vec<f64>) -> impl FnMut(&[f64]) -> f64 {
        move |x| x.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum()
    }

    #[test]
    fn converges_on_quadratic() {
        let center = vec![1.0, 2.0, 3.0, 4.0, 2.5, 1.5, 0.5, 3.5];
        let start: Vec<f64> = center.iter().map(|c| c + 0.3).collect();
        let cfg = RefineConfig { max_evals: 499, ..Default::default() };
        let r = refine(sphere(center.clone()), &start, &cfg).unwrap();
        assert!(r.evals < 500);
        for (a, b) in r.theta.iter().zip(&center) {
            assert!((a - b).abs() < 1e-4, "{:?}", r.theta);
        }
    }

    #[test]
    fn no_regression_from_minimizer() {
        let center = vec![1.0, 1.0];
        let r = refine(sphere(center.clone()), &center, &RefineConfig::default()).unwrap();
        assert!(r.value <= 0.0);
    }

    #[test]
    fn budget_respected() {
        let mut calls = 0;
        let f = |x: &[f64]| {
            calls += 1;
            x.iter().map(|v| v.sin()).sum::<f64>()
        };
        let cfg = RefineConfig { max_evals: 37, ..Default::default() };
        let r = refine(f, &[0.3, 2.0, 5.0], &cfg).unwrap();
        assert_eq!(r.evals, calls);
        assert!(r.evals <= 37);
    }

    #[test]
    fn wraps_before_evaluation() {
        let mut seen = Vec::new();
        let f = |x: &[f64]| {
            seen.extend_from_slice(x);
            0.0
        };
        refine(f, &[-1.0, 7.0], &RefineConfig::default()).unwrap();
        assert!(seen.iter().all(|&v| (0.0..TAU).contains(&v)));
    }

    #[test]
    fn errors() {
        let r = refine(|_| f64::NAN, &[0.0], &RefineConfig::default());
        assert!(matches!(r, Err(RefineError::NonFinite { .. })));
        let cfg = RefineConfig { max_evals: 3, ..Default::default() };
        assert!(matches!(refine(|_| 0.0, &[0.0; 4], &cfg), Err(RefineError::InvalidConfig(_))));
        let cfg = RefineConfig { tol: 0.0, ..Default::default() };
        assert!(refine(|_| 0.0, &[0.0], &cfg).is_err());
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (v * (i + 1) as f64).cos()).sum::<f64>();
        let cfg = RefineConfig { seed: 3, ..Default::default() };
        assert_eq!(refine(f, &[1.0, 2.0, 3.0], &cfg).unwrap(), refine(f, &[1.0, 2.0, 3.0], &cfg).unwrap());
    }
}
