//! Tensor-train probabilistic optimization of QAOA circuits for max-3-cut.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: weighted graphs, k-cut values, exact brute force and approximation ratios.
//! - [`qaoa_model`]: two-qubit binary color encoding and the diagonal cost Hamiltonian.
//! - [`simulator`]: dense statevector QAOA with diagonal and gate-level phase separators.
//! - [`tt`]: tensor-train distributions with exact conditional sampling and log-likelihood gradients.
//! - [`protes`]: the sample / evaluate / select / ascend loop over a discrete angle grid.
//! - [`refine`]: Nelder-Mead local refinement on the periodic parameter torus.
//! - [`pipeline`]: solve, landscape, histogram and brute-force runs with serializable reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod graph;
pub mod pipeline;
pub mod protes;
pub mod qaoa_model;
pub mod refine;
pub mod simulator;
pub mod tt;

pub use config::PipelineConfig;
pub use graph::{approximation_ratio, ApproximationReport, Coloring, Edge, Graph, GraphError};
pub use pipeline::{Landscape, PipelineError, RunReport, SolveOptions};
pub use protes::{ParameterGrid, ProtesConfig};
pub use qaoa_model::{cut_from_energy, decode_bitstring, CostDiagonal};
pub use refine::RefineConfig;
pub use simulator::{Backend, ParameterVector, QaoaInstance, Statevector};
pub use tt::{MultiIndex, TtDistribution};
