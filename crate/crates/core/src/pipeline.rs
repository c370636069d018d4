//! End-to-end pipelines: optimize-then-refine solve runs, p = 1 landscape
//! scans, measurement histograms and the brute-force baseline.
//!
//! Approximation ratios use the exact statevector expectation; shots only
//! feed the histogram. All outputs are deterministic for a fixed seed.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::graph::{approximation_ratio, Coloring, Graph, GraphError};
use crate::protes::{self, ParameterGrid, ProtesConfig, ProtesError};
use crate::qaoa_model::{cut_from_energy, decode_bitstring, render_bitstring, COLORS};
use crate::refine::{self, RefineConfig, RefineError};
use crate::simulator::{Backend, ParameterVector, QaoaInstance, SimError, DEFAULT_SHOTS};
use crate::tt::MultiIndex;

/// Rows of the measurement table kept in a [`RunReport`].
pub const REPORT_TOP_COUNTS: usize = 20;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("optimal cut is zero; the approximation ratio is undefined")]
    ZeroOptimum,
    #[error("theta has {got} entries, expected {expected} for depth {depth}")]
    ThetaLength { expected: usize, got: usize, depth: usize },
    #[error("resolution must be at least 1")]
    ZeroResolution,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Protes(#[from] ProtesError),
    #[error(transparent)]
    Refine(#[from] RefineError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub n: usize,
    pub edges: usize,
    pub total_weight: f64,
}

impl From<&Graph> for GraphSummary {
    fn from(g: &Graph) -> Self {
        Self { n: g.n(), edges: g.edges().len(), total_weight: g.total_weight() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramRow {
    pub bitstring: String,
    pub count: usize,
    pub coloring: String,
    pub cut: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub brute_force_s: f64,
    pub protes_s: f64,
    pub refine_s: f64,
    pub sampling_s: f64,
}

/// Result record of a solve run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub graph: GraphSummary,
    pub depth: usize,
    pub backend: Backend,
    pub protes: ProtesConfig,
    pub refine: RefineConfig,
    pub seed: u64,
    pub optimal_cut: f64,
    pub optimal_coloring: Coloring,
    pub protes_energy: f64,
    pub protes_expected_cut: f64,
    pub alpha_p: f64,
    pub protes_theta: Vec<f64>,
    pub protes_evaluations: usize,
    pub refined_energy: f64,
    pub refined_expected_cut: f64,
    pub alpha_c: f64,
    pub theta: Vec<f64>,
    pub refine_evaluations: usize,
    pub shots: usize,
    pub top_counts: Vec<HistogramRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub depth: usize,
    pub backend: Backend,
    pub config: PipelineConfig,
    pub shots: usize,
    /// Overrides the seeds in `config` when set.
    pub seed: Option<u64>,
    pub record_timings: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            depth: 4,
            backend: Backend::Diagonal,
            config: PipelineConfig::default(),
            shots: DEFAULT_SHOTS,
            seed: None,
            record_timings: false,
        }
    }
}

fn energy_or_nan(inst: &QaoaInstance, theta: &[f64]) -> f64 {
    ParameterVector::from_flat(theta)
        .and_then(|t| inst.energy(&t))
        .unwrap_or(f64::NAN)
}

fn shot_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Brute force, optimization over the `2p`-dimensional grid, local
/// refinement and a final measurement.
pub fn solve(graph: &Graph, opts: &SolveOptions) -> Result<RunReport, PipelineError> {
    let mut protes_cfg = opts.config.protes.clone();
    let mut refine_cfg = opts.config.refine.clone();
    if let Some(seed) = opts.seed {
        protes_cfg.seed = seed;
        refine_cfg.seed = seed;
    }
    let seed = protes_cfg.seed;

    let clock = Instant::now();
    let (optimal_coloring, optimal_cut) = graph.brute_force_max_cut(COLORS)?;
    if !(optimal_cut > 0.0) {
        return Err(PipelineError::ZeroOptimum);
    }
    let t_brute = clock.elapsed().as_secs_f64();

    let inst = QaoaInstance::new(graph.clone(), opts.depth, opts.backend)?;
    let grid = ParameterGrid::for_depth(opts.depth, protes_cfg.nodes);

    let clock = Instant::now();
    let trace = protes::optimize(|idx: &MultiIndex| energy_or_nan(&inst, &grid.index_to_flat(idx)), grid.dims, &protes_cfg)?;
    let t_protes = clock.elapsed().as_secs_f64();
    let protes_theta = grid.index_to_flat(&trace.best());
    let protes_energy = trace.best_value;

    let clock = Instant::now();
    let refined = refine::refine(|x| energy_or_nan(&inst, x), &protes_theta, &refine_cfg)?;
    let t_refine = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let top_counts = histogram(&inst, &refined.theta, opts.shots, seed)?
        .into_iter()
        .take(REPORT_TOP_COUNTS)
        .collect();
    let t_sampling = clock.elapsed().as_secs_f64();

    let protes_expected_cut = cut_from_energy(protes_energy, graph);
    let refined_expected_cut = cut_from_energy(refined.value, graph);
    Ok(RunReport {
        graph: graph.into(),
        depth: opts.depth,
        backend: opts.backend,
        protes: protes_cfg,
        refine: refine_cfg,
        seed,
        optimal_cut,
        optimal_coloring,
        protes_energy,
        protes_expected_cut,
        alpha_p: approximation_ratio(protes_expected_cut, optimal_cut)?.ratio,
        protes_theta,
        protes_evaluations: trace.evaluations,
        refined_energy: refined.value,
        refined_expected_cut,
        alpha_c: approximation_ratio(refined_expected_cut, optimal_cut)?.ratio,
        theta: refined.theta,
        refine_evaluations: refined.evals,
        shots: opts.shots,
        top_counts,
        timings: opts.record_timings.then_some(Timings {
            brute_force_s: t_brute,
            protes_s: t_protes,
            refine_s: t_refine,
            sampling_s: t_sampling,
        }),
    })
}

/// Samples the circuit at `theta` and tabulates outcomes by descending
/// count (ties by ascending basis index).
pub fn histogram(inst: &QaoaInstance, theta: &[f64], shots: usize, seed: u64) -> Result<Vec<HistogramRow>, PipelineError> {
    let expected = 2 * inst.depth();
    if theta.len() != expected {
        return Err(PipelineError::ThetaLength { expected, got: theta.len(), depth: inst.depth() });
    }
    let state = inst.run(&ParameterVector::from_flat(theta)?)?;
    let n = inst.graph().n();
    let counts = state.sample_counts(2 * n, shots, &mut shot_rng(seed));
    let mut rows: Vec<(usize, usize)> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    rows.into_iter()
        .map(|(z, count)| {
            let coloring = decode_bitstring(z, n).map_err(SimError::from)?;
            let cut = inst.graph().cut_value(&coloring)?;
            Ok(HistogramRow { bitstring: render_bitstring(z, n), count, coloring: coloring.to_string(), cut })
        })
        .collect()
}

/// CSV with header `bitstring,count,coloring,cut`.
pub fn histogram_csv(rows: &[HistogramRow]) -> String {
    let mut s = String::from("bitstring,count,coloring,cut\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.bitstring, r.count, r.coloring, r.cut));
    }
    s
}

/// Dense p = 1 energy scan over `[0, 2pi)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub resolution: usize,
    /// Row-major, `energies[i * resolution + j]` at `(gamma_i, beta_j)`.
    pub energies: Vec<f64>,
}

pub fn landscape(graph: &Graph, resolution: usize) -> Result<Landscape, PipelineError> {
    if resolution == 0 {
        return Err(PipelineError::ZeroResolution);
    }
    let inst = QaoaInstance::new(graph.clone(), 1, Backend::Diagonal)?;
    let grid = ParameterGrid::new(2, resolution);
    let energies = (0..resolution * resolution)
        .into_par_iter()
        .map(|cell| {
            let (i, j) = (cell / resolution, cell % resolution);
            energy_or_nan(&inst, &[grid.node(i), grid.node(j)])
        })
        .collect();
    Ok(Landscape { resolution, energies })
}

impl Landscape {
    pub fn angle(&self, i: usize) -> f64 {
        ParameterGrid::new(2, self.resolution).node(i)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.energies[i * self.resolution + j]
    }

    /// `(i, j, energy)` of the lowest cell, first in row-major order.
    pub fn minimum(&self) -> (usize, usize, f64) {
        let (cell, e) = self
            .energies
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (c, e)| if e < b.1 { (c, e) } else { b });
        (cell / self.resolution, cell % self.resolution, e)
    }

    /// Connected groups (4-neighbour, periodic in both angles) of cells
    /// whose energy is within `rel * |E_min|` of the minimum. Each group is
    /// a list of `(i, j)` cells; groups are ordered by their first cell.
    pub fn near_optimal_components(&self, rel: f64) -> Vec<Vec<(usize, usize)>> {
        let r = self.resolution;
        let (_, _, emin) = self.minimum();
        let threshold = emin + rel * emin.abs();
        let selected: Vec<bool> = self.energies.iter().map(|&e| e <= threshold).collect();
        let mut seen = vec![false; r * r];
        let mut groups = Vec::new();
        for start in 0..r * r {
            if !selected[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut group = Vec::new();
            while let Some(c) = stack.pop() {
                let (i, j) = (c / r, c % r);
                group.push((i, j));
                for (di, dj) in [(1, 0), (r - 1, 0), (0, 1), (0, r - 1)] {
                    let nb = ((i + di) % r) * r + (j + dj) % r;
                    if selected[nb] && !seen[nb] {
                        seen[nb] = true;
                        stack.push(nb);
                    }
                }
            }
            group.sort_unstable();
            groups.push(group);
        }
        groups
    }

    /// CSV with header `gamma,beta,energy`, gamma-major.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("gamma,beta,energy\n");
        for i in 0..self.resolution {
            for j in 0..self.resolution {
                s.push_str(&format!("{},{},{}\n", self.angle(i), self.angle(j), self.at(i, j)));
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteReport {
    pub k: usize,
    pub coloring: Coloring,
    pub optimal_cut: f64,
}

pub fn brute(graph: &Graph, k: usize) -> Result<BruteReport, PipelineError> {
    let (coloring, optimal_cut) = graph.brute_force_max_cut(k)?;
    Ok(BruteReport { k, coloring, optimal_cut })
}
