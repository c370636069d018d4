//! Tensor-train representation of an unnormalized distribution over
//! multi-indices `(i_1, ..., i_d)` with `0 <= i_k < N`.
//!
//! Core `k` has shape `(R_{k-1}, N, R_k)` with `R_0 = R_d = 1` and is stored
//! row-major, so entry `[a, i, b]` lives at `(a * N + i) * R_k + b`. The
//! tensor value at an index is the chained product of the selected slices.
//!
//! Sampling draws one coordinate at a time from the exact univariate
//! conditional, using right-to-left marginal vectors. Negative conditional
//! masses are clamped to zero; an all-zero conditional falls back to a
//! uniform draw and is counted in [`SamplingDiagnostics`].
//!
//! Checkpoint text format (whitespace separated, `#` lines ignored):
//!
//! ```text
//! tt <d> <N>
//! ranks <R_0> <R_1> ... <R_d>
//! <entries of core 1, row-major>
//! ...
//! <entries of core d, row-major>
//! ```

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

/// Lower bound of the uniform initialization range.
pub const INIT_FLOOR: f64 = 1e-6;

/// Floor applied to non-positive slice entries during ascent.
pub const CLAMP_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TtError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("multi-index has length {got}, expected {expected}")]
    IndexLength { expected: usize, got: usize },
    #[error("index {value} at position {position} out of range for N = {n}")]
    IndexOutOfRange { position: usize, value: usize, n: usize },
    #[error("tensor value {0} at index is not positive")]
    NonPositiveValue(f64),
    #[error("empty batch")]
    EmptyBatch,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Grid multi-index, one entry per tensor dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(indices: Vec<usize>) -> Self {
        Self(indices)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// One three-way core.
#[derive(Debug, Clone, PartialEq)]
pub struct Core {
    left: usize,
    modes: usize,
    right: usize,
    data: Vec<f64>,
}

impl Core {
    pub fn new(left: usize, modes: usize, right: usize, data: Vec<f64>) -> Result<Self, TtError> {
        if left == 0 || modes == 0 || right == 0 {
            return Err(TtError::InvalidShape(format!("core shape ({left}, {modes}, {right}) has a zero extent")));
        }
        if data.len() != left * modes * right {
            return Err(TtError::InvalidShape(format!(
                "core ({left}, {modes}, {right}) needs {} entries, got {}",
                left * modes * right,
                data.len()
            )));
        }
        Ok(Self { left, modes, right, data })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.left, self.modes, self.right)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, b: usize) -> f64 {
        self.data[(a * self.modes + i) * self.right + b]
    }

    /// `phi^T G[:, i, :]`.
    fn left_mul(&self, phi: &[f64], i: usize, out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.right, 0.0);
        for (a, &p) in phi.iter().enumerate() {
            let row = &self.data[(a * self.modes + i) * self.right..][..self.right];
            for (o, &g) in out.iter_mut().zip(row) {
                *o += p * g;
            }
        }
    }

    /// `G[:, i, :] z`.
    fn right_mul(&self, i: usize, z: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for a in 0..self.left {
            let row = &self.data[(a * self.modes + i) * self.right..][..self.right];
            out.push(row.iter().zip(z).map(|(g, z)| g * z).sum());
        }
    }
}

/// Per-batch sampling diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SamplingDiagnostics {
    /// Conditionals that were entirely non-positive and replaced by uniform.
    pub uniform_fallbacks: usize,
}

/// Diagnostics from [`TtDistribution::ascent_step`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AscentDiagnostics {
    /// Slice entries raised to [`CLAMP_FLOOR`] after a batch value collapsed.
    pub clamped_entries: usize,
}

/// Gradient of `ln P[idx]` with respect to each core, same shapes as the cores.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreGradients(pub Vec<Vec<f64>>);

/// Fills `weights[i] = max(phi^T G[:, i, :] z, 0)` and returns their sum.
fn conditional_masses(core: &Core, phi: &[f64], z: &[f64], weights: &mut [f64], tmp: &mut Vec<f64>) -> f64 {
    let mut total = 0.0;
    for (i, w) in weights.iter_mut().enumerate() {
        core.left_mul(phi, i, tmp);
        let mass: f64 = tmp.iter().zip(z).map(|(a, b)| a * b).sum();
        *w = if mass > 0.0 { mass } else { 0.0 };
        total += *w;
    }
    total
}

/// `phi <- phi^T G[:, i, :]`, rescaled to unit max-norm.
fn advance(core: &Core, phi: &mut Vec<f64>, i: usize, tmp: &mut Vec<f64>) {
    core.left_mul(phi, i, tmp);
    let scale = tmp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale > 0.0 && scale.is_finite() {
        tmp.iter_mut().for_each(|v| *v /= scale);
    }
    std::mem::swap(phi, tmp);
}

#[derive(Debug, Clone, PartialEq)]
pub struct TtDistribution {
    modes: usize,
    cores: Vec<Core>,
}

impl TtDistribution {
    /// Random positive TT with interior ranks `rank`, entries uniform in `(INIT_FLOOR, 1]`.
    pub fn random<R: Rng + ?Sized>(d: usize, modes: usize, rank: usize, rng: &mut R) -> Result<Self, TtError> {
        if d == 0 || modes < 2 || rank == 0 {
            return Err(TtError::InvalidShape(format!("need d >= 1, N >= 2, R >= 1; got d={d}, N={modes}, R={rank}")));
        }
        let cores = (0..d)
            .map(|k| {
                let left = if k == 0 { 1 } else { rank };
                let right = if k + 1 == d { 1 } else { rank };
                let data = (0..left * modes * right)
                    .map(|_| 1.0 - (1.0 - INIT_FLOOR) * rng.gen::<f64>())
                    .collect();
                Core::new(left, modes, right, data)
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { modes, cores })
    }

    pub fn from_cores(cores: Vec<Core>) -> Result<Self, TtError> {
        let first = cores.first().ok_or_else(|| TtError::InvalidShape("no cores".into()))?;
        let modes = first.modes;
        if first.left != 1 || cores.last().map(|c| c.right) != Some(1) {
            return Err(TtError::InvalidShape("boundary ranks must be 1".into()));
        }
        for (k, pair) in cores.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(TtError::InvalidShape(format!("rank mismatch between cores {k} and {}", k + 1)));
            }
        }
        if cores.iter().any(|c| c.modes != modes) {
            return Err(TtError::InvalidShape("all cores must share N".into()));
        }
        Ok(Self { modes, cores })
    }

    pub fn dims(&self) -> usize {
        self.cores.len()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    /// `[R_0, R_1, ..., R_d]`.
    pub fn ranks(&self) -> Vec<usize> {
        std::iter::once(1).chain(self.cores.iter().map(|c| c.right)).collect()
    }

    fn validate(&self, idx: &MultiIndex) -> Result<(), TtError> {
        if idx.len() != self.dims() {
            return Err(TtError::IndexLength { expected: self.dims(), got: idx.len() });
        }
        if let Some((position, &value)) = idx.0.iter().enumerate().find(|(_, &i)| i >= self.modes) {
            return Err(TtError::IndexOutOfRange { position, value, n: self.modes });
        }
        Ok(())
    }

    pub fn value(&self, idx: &MultiIndex) -> Result<f64, TtError> {
        self.validate(idx)?;
        Ok(self.value_unchecked(idx.as_slice()))
    }

    fn value_unchecked(&self, idx: &[usize]) -> f64 {
        let mut phi = vec![1.0];
        let mut next = Vec::new();
        for (core, &i) in self.cores.iter().zip(idx) {
            core.left_mul(&phi, i, &mut next);
            std::mem::swap(&mut phi, &mut next);
        }
        phi[0]
    }

    /// Marginal vectors `Z_1, ..., Z_{d+1}` with `Z_{d+1} = [1]` and
    /// `Z_k = (sum_i G_k[:, i, :]) Z_{k+1}`. `Z_1[0]` is the total tensor mass.
    pub fn right_marginals(&self) -> Vec<Vec<f64>> {
        self.marginals(false)
    }

    fn marginals(&self, rescale: bool) -> Vec<Vec<f64>> {
        let d = self.dims();
        let mut z = vec![Vec::new(); d + 1];
        z[d] = vec![1.0];
        for k in (0..d).rev() {
            let core = &self.cores[k];
            let mut out = vec![0.0; core.left];
            let mut tmp = Vec::new();
            for i in 0..self.modes {
                core.right_mul(i, &z[k + 1], &mut tmp);
                for (o, t) in out.iter_mut().zip(&tmp) {
                    *o += t;
                }
            }
            if rescale {
                // Only ratios within one conditional matter when sampling.
                let scale = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if scale > 0.0 && scale.is_finite() {
                    out.iter_mut().for_each(|v| *v /= scale);
                }
            }
            z[k] = out;
        }
        z
    }

    /// Draws one multi-index with probability proportional to its value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MultiIndex {
        self.sample_batch(1, rng).0.pop().expect("one sample")
    }

    pub fn sample_batch<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> (Vec<MultiIndex>, SamplingDiagnostics) {
        let z = self.marginals(true);
        let mut diag = SamplingDiagnostics::default();
        let mut weights = vec![0.0; self.modes];
        let mut tmp = Vec::new();
        let mut phi = Vec::new();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            phi.clear();
            phi.push(1.0);
            let mut idx = Vec::with_capacity(self.dims());
            for (k, core) in self.cores.iter().enumerate() {
                let total = conditional_masses(core, &phi, &z[k + 1], &mut weights, &mut tmp);
                let choice = if total > 0.0 && total.is_finite() {
                    let u = rng.gen::<f64>() * total;
                    let mut acc = 0.0;
                    let mut pick = None;
                    for (i, &w) in weights.iter().enumerate() {
                        acc += w;
                        if u < acc {
                            pick = Some(i);
                            break;
                        }
                    }
                    // Rounding can leave u at the very top; take the last positive weight.
                    pick.unwrap_or_else(|| weights.iter().rposition(|&w| w > 0.0).unwrap_or(0))
                } else {
                    diag.uniform_fallbacks += 1;
                    rng.gen_range(0..self.modes)
                };
                idx.push(choice);
                advance(core, &mut phi, choice, &mut tmp);
            }
            out.push(MultiIndex(idx));
        }
        (out, diag)
    }

    /// Sampling distribution of `i_{k+1}` given the prefix `i_1..i_k`, after
    /// clamping negative masses to zero. `None` when no mass is positive, in
    /// which case sampling falls back to uniform.
    pub fn conditional(&self, prefix: &[usize]) -> Result<Option<Vec<f64>>, TtError> {
        if prefix.len() >= self.dims() {
            return Err(TtError::IndexLength { expected: self.dims() - 1, got: prefix.len() });
        }
        if let Some((position, &value)) = prefix.iter().enumerate().find(|(_, &i)| i >= self.modes) {
            return Err(TtError::IndexOutOfRange { position, value, n: self.modes });
        }
        let z = self.marginals(true);
        let mut phi = vec![1.0];
        let mut tmp = Vec::new();
        for (core, &i) in self.cores.iter().zip(prefix) {
            advance(core, &mut phi, i, &mut tmp);
        }
        let k = prefix.len();
        let mut weights = vec![0.0; self.modes];
        let total = conditional_masses(&self.cores[k], &phi, &z[k + 1], &mut weights, &mut tmp);
        if !(total > 0.0) || !total.is_finite() {
            return Ok(None);
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Some(weights))
    }

    /// Left interfaces `L_k` (length `R_{k-1}`), right interfaces `Q_k`
    /// (length `R_k`) and the value at `idx`.
    fn interfaces(&self, idx: &[usize]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, f64) {
        let d = self.dims();
        let mut left = Vec::with_capacity(d);
        let mut phi = vec![1.0];
        for (core, &i) in self.cores.iter().zip(idx) {
            let mut next = Vec::new();
            core.left_mul(&phi, i, &mut next);
            left.push(std::mem::replace(&mut phi, next));
        }
        let value = phi[0];
        let mut right = vec![Vec::new(); d];
        let mut q = vec![1.0];
        for k in (0..d).rev() {
            let mut next = Vec::new();
            self.cores[k].right_mul(idx[k], &q, &mut next);
            right[k] = std::mem::replace(&mut q, next);
        }
        (left, right, value)
    }

    /// `d ln P[idx] / dG_k` for every core: nonzero only on slice `i_k`,
    /// where it equals `L_k Q_k^T / P[idx]`.
    pub fn log_value_grad(&self, idx: &MultiIndex) -> Result<CoreGradients, TtError> {
        self.validate(idx)?;
        let (left, right, value) = self.interfaces(idx.as_slice());
        if !(value > 0.0) {
            return Err(TtError::NonPositiveValue(value));
        }
        let mut grads: Vec<Vec<f64>> = self.cores.iter().map(|c| vec![0.0; c.data.len()]).collect();
        self.accumulate_grad(idx.as_slice(), &left, &right, 1.0 / value, &mut grads);
        Ok(CoreGradients(grads))
    }

    fn accumulate_grad(&self, idx: &[usize], left: &[Vec<f64>], right: &[Vec<f64>], weight: f64, grads: &mut [Vec<f64>]) {
        for (k, core) in self.cores.iter().enumerate() {
            let i = idx[k];
            for (a, &l) in left[k].iter().enumerate() {
                let base = (a * core.modes + i) * core.right;
                for (b, &r) in right[k].iter().enumerate() {
                    grads[k][base + b] += weight * l * r;
                }
            }
        }
    }

    /// `k_gd` steps of `G <- G + lambda * grad L` with `L = sum ln P[idx]` over the batch.
    pub fn ascent_step(&mut self, batch: &[MultiIndex], lambda: f64, k_gd: usize) -> Result<AscentDiagnostics, TtError> {
        if batch.is_empty() {
            return Err(TtError::EmptyBatch);
        }
        for idx in batch {
            self.validate(idx)?;
        }
        let mut diag = AscentDiagnostics::default();
        let mut grads: Vec<Vec<f64>> = self.cores.iter().map(|c| vec![0.0; c.data.len()]).collect();
        for _ in 0..k_gd {
            grads.iter_mut().for_each(|g| g.fill(0.0));
            for idx in batch {
                let idx = idx.as_slice();
                let (mut left, mut right, mut value) = self.interfaces(idx);
                if !(value > 0.0) || !value.is_finite() {
                    diag.clamped_entries += self.clamp_slices(idx);
                    (left, right, value) = self.interfaces(idx);
                }
                self.accumulate_grad(idx, &left, &right, 1.0 / value, &mut grads);
            }
            for (core, g) in self.cores.iter_mut().zip(&grads) {
                for (x, dg) in core.data.iter_mut().zip(g) {
                    *x += lambda * dg;
                }
            }
        }
        Ok(diag)
    }

    /// Raises non-positive entries on the slices selected by `idx` to the
    /// clamp floor, which makes the value at `idx` strictly positive.
    fn clamp_slices(&mut self, idx: &[usize]) -> usize {
        let mut clamped = 0;
        for (core, &i) in self.cores.iter_mut().zip(idx) {
            for a in 0..core.left {
                let base = (a * core.modes + i) * core.right;
                for x in &mut core.data[base..base + core.right] {
                    if !(*x > 0.0) {
                        *x = CLAMP_FLOOR;
                        clamped += 1;
                    }
                }
            }
        }
        clamped
    }

    pub fn to_checkpoint(&self) -> String {
        let mut s = format!("tt {} {}\nranks", self.dims(), self.modes);
        for r in self.ranks() {
            let _ = write!(s, " {r}");
        }
        s.push('\n');
        for core in &self.cores {
            let line: Vec<String> = core.data.iter().map(|x| x.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_checkpoint(text: &str) -> Result<Self, TtError> {
        let bad = |m: &str| TtError::Checkpoint(m.to_string());
        let mut tokens = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(str::split_whitespace);
        if tokens.next() != Some("tt") {
            return Err(bad("expected \"tt\" header"));
        }
        let mut next_usize = |what: &str| -> Result<usize, TtError> {
            tokens
                .next()
                .ok_or_else(|| bad(&format!("missing {what}")))?
                .parse()
                .map_err(|_| bad(&format!("invalid {what}")))
        };
        let d = next_usize("d")?;
        let modes = next_usize("N")?;
        if tokens.next() != Some("ranks") {
            return Err(bad("expected \"ranks\" line"));
        }
        let ranks: Vec<usize> = (0..=d)
            .map(|_| {
                tokens
                    .next()
                    .ok_or_else(|| bad("missing rank"))?
                    .parse()
                    .map_err(|_| bad("invalid rank"))
            })
            .collect::<Result<_, _>>()?;
        let mut cores = Vec::with_capacity(d);
        for k in 0..d {
            let len = ranks[k] * modes * ranks[k + 1];
            let data = (0..len)
                .map(|_| {
                    tokens
                        .next()
                        .ok_or_else(|| bad("truncated core data"))?
                        .parse::<f64>()
                        .map_err(|_| bad("invalid core entry"))
                })
                .collect::<Result<_, _>>()?;
            cores.push(Core::new(ranks[k], modes, ranks[k + 1], data)?);
        }
        if tokens.next().is_some() {
            return Err(bad("trailing data"));
        }
        Self::from_cores(cores)
    }
}
