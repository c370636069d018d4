//! Dense statevector simulation of QAOA circuits.
//!
//! Qubit `q` corresponds to bit `q` of the amplitude index. The `2n` color
//! qubits follow the layout of [`crate::qaoa_model`]; the gate-level backend
//! appends two ancillas as the most significant qubits `2n` and `2n + 1`.
//!
//! Two interchangeable phase separators are provided: a direct diagonal
//! update from the [`CostDiagonal`], and a gate-level circuit built per edge
//! from X, CX, CCX and (multi-)controlled phase gates with ancilla
//! uncomputation. They agree up to a global phase.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::qaoa_model::{CostDiagonal, ModelError};

/// Largest register the simulator allocates.
pub const MAX_QUBITS: usize = 26;

/// Default number of measurement shots.
pub const DEFAULT_SHOTS: usize = 4096;

const ANCILLA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{qubits} qubits exceed the simulator limit of {MAX_QUBITS}")]
    TooManyQubits { qubits: usize },
    #[error("need at least one vertex")]
    NoVertices,
    #[error("qubit {qubit} out of range for a {qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, qubits: usize },
    #[error("qubit {0} used more than once in a gate")]
    QubitCollision(usize),
    #[error("state has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ancilla register not in |00>: residual mass {0:e}")]
    DirtyAncilla(f64),
    #[error("parameter vector has depth {got}, instance has depth {expected}")]
    DepthMismatch { expected: usize, got: usize },
    #[error("gammas and betas differ in length ({gammas} vs {betas})")]
    RaggedParameters { gammas: usize, betas: usize },
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Diagonal,
    #[serde(rename = "gate")]
    GateLevel,
}

impl Backend {
    pub fn ancillas(self) -> usize {
        match self {
            Backend::Diagonal => 0,
            Backend::GateLevel => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Backend::Diagonal => "diagonal",
            Backend::GateLevel => "gate",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "diagonal" => Ok(Backend::Diagonal),
            "gate" => Ok(Backend::GateLevel),
            other => Err(format!("unknown backend {other:?} (expected diagonal|gate)")),
        }
    }
}

/// Variational angles of a depth-`p` circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl ParameterVector {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self, SimError> {
        if gammas.len() != betas.len() {
            return Err(SimError::RaggedParameters { gammas: gammas.len(), betas: betas.len() });
        }
        if gammas.is_empty() {
            return Err(SimError::ZeroDepth);
        }
        Ok(Self { gammas, betas })
    }

    /// Splits a flat `(gamma_1..gamma_p, beta_1..beta_p)` vector.
    pub fn from_flat(theta: &[f64]) -> Result<Self, SimError> {
        if !theta.len().is_multiple_of(2) {
            return Err(SimError::RaggedParameters { gammas: theta.len().div_ceil(2), betas: theta.len() / 2 });
        }
        let p = theta.len() / 2;
        Self::new(theta[..p].to_vec(), theta[p..].to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Every angle reduced into `[0, 2pi)`.
    pub fn wrapped(&self) -> Self {
        let wrap = |v: &Vec<f64>| v.iter().map(|x| x.rem_euclid(TAU)).collect();
        Self { gammas: wrap(&self.gammas), betas: wrap(&self.betas) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>` on `qubits` qubits.
    pub fn zero(qubits: usize) -> Result<Self, SimError> {
        Self::basis(qubits, 0)
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self, SimError> {
        if qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits { qubits });
        }
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(SimError::DimensionMismatch { expected: dim, got: index });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two. No normalization is applied.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(SimError::DimensionMismatch { expected: dim.next_power_of_two(), got: dim });
        }
        let qubits = dim.trailing_zeros() as usize;
        if qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits { qubits });
        }
        Ok(Self { qubits, amps })
    }

    /// `|+>` on each of the `2n` color qubits, ancillas (if any) in `|0>`.
    pub fn initial(n: usize, backend: Backend) -> Result<Self, SimError> {
        if n == 0 {
            return Err(SimError::NoVertices);
        }
        let qubits = 2 * n + backend.ancillas();
        if qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits { qubits });
        }
        let color_dim = 1usize << (2 * n);
        let amp = Complex64::new((color_dim as f64).sqrt().recip(), 0.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[..color_dim].fill(amp);
        Ok(Self { qubits, amps })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Statevector) -> Result<Complex64, SimError> {
        if self.amps.len() != other.amps.len() {
            return Err(SimError::DimensionMismatch { expected: self.amps.len(), got: other.amps.len() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64, SimError> {
        Ok(self.inner(other)?.norm())
    }

    fn check(&self, qs: &[usize]) -> Result<(), SimError> {
        for (k, &q) in qs.iter().enumerate() {
            if q >= self.qubits {
                return Err(SimError::QubitOutOfRange { qubit: q, qubits: self.qubits });
            }
            if qs[..k].contains(&q) {
                return Err(SimError::QubitCollision(q));
            }
        }
        Ok(())
    }

    /// Applies a 2x2 unitary `[[a, b], [c, d]]` to `target` on every index
    /// whose `mask` bits are all set.
    fn apply_single(&mut self, target: usize, mask: usize, m: [Complex64; 4]) {
        let bit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & bit != 0 || i & mask != mask {
                continue;
            }
            let (a0, a1) = (self.amps[i], self.amps[i | bit]);
            self.amps[i] = m[0] * a0 + m[1] * a1;
            self.amps[i | bit] = m[2] * a0 + m[3] * a1;
        }
    }

    fn swap_controlled(&mut self, target: usize, mask: usize) {
        let bit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & bit == 0 && i & mask == mask {
                self.amps.swap(i, i | bit);
            }
        }
    }

    pub fn apply_x(&mut self, q: usize) -> Result<(), SimError> {
        self.check(&[q])?;
        self.swap_controlled(q, 0);
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<(), SimError> {
        self.check(&[q])?;
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single(q, 0, [h, h, h, -h]);
        Ok(())
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) -> Result<(), SimError> {
        self.check(&[control, target])?;
        self.swap_controlled(target, 1 << control);
        Ok(())
    }

    pub fn apply_ccx(&mut self, c0: usize, c1: usize, target: usize) -> Result<(), SimError> {
        self.check(&[c0, c1, target])?;
        self.swap_controlled(target, (1 << c0) | (1 << c1));
        Ok(())
    }

    /// `diag(1, e^{i phi})` on `target`, conditioned on every control being `|1>`.
    pub fn apply_controlled_phase(&mut self, controls: &[usize], target: usize, phi: f64) -> Result<(), SimError> {
        let mut all = controls.to_vec();
        all.push(target);
        self.check(&all)?;
        let mask = all.iter().fold(0usize, |m, &q| m | (1 << q));
        let phase = Complex64::from_polar(1.0, phi);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a *= phase;
            }
        }
        Ok(())
    }

    /// `R_X(theta) = exp(-i theta X / 2)`.
    pub fn apply_rx(&mut self, q: usize, theta: f64) -> Result<(), SimError> {
        self.check(&[q])?;
        self.rx_unchecked(q, theta);
        Ok(())
    }

    fn rx_unchecked(&mut self, q: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let c = Complex64::new(c, 0.0);
        let mis = Complex64::new(0.0, -s);
        self.apply_single(q, 0, [c, mis, mis, c]);
    }

    /// Mixer `exp(-i beta X)` on each of the `color_qubits` lowest qubits.
    pub fn apply_mixer(&mut self, color_qubits: usize, beta: f64) -> Result<(), SimError> {
        if color_qubits > self.qubits {
            return Err(SimError::QubitOutOfRange { qubit: color_qubits, qubits: self.qubits });
        }
        for q in 0..color_qubits {
            self.rx_unchecked(q, 2.0 * beta);
        }
        Ok(())
    }

    /// `amp[z] *= exp(-i gamma c[z])`, with `z` taken over the color qubits.
    pub fn apply_phase_diagonal(&mut self, cd: &CostDiagonal, gamma: f64) -> Result<(), SimError> {
        if self.amps.len() != cd.len() {
            return Err(SimError::DimensionMismatch { expected: cd.len(), got: self.amps.len() });
        }
        for (a, &c) in self.amps.iter_mut().zip(cd.values()) {
            *a *= Complex64::from_polar(1.0, -gamma * c);
        }
        Ok(())
    }

    fn ancilla_mass(&self, color_qubits: usize) -> f64 {
        self.amps[1 << color_qubits..].iter().map(|a| a.norm_sqr()).sum()
    }

    /// Gate-level phase separator for max-3-cut. The register must hold
    /// `2n` color qubits followed by two ancillas in `|00>`.
    pub fn apply_phase_gate_level(&mut self, g: &Graph, gamma: f64) -> Result<(), SimError> {
        let color = 2 * g.n();
        if self.qubits != color + 2 {
            return Err(SimError::DimensionMismatch { expected: 1 << (color + 2), got: self.amps.len() });
        }
        let residual = self.ancilla_mass(color);
        if residual > ANCILLA_TOLERANCE {
            return Err(SimError::DirtyAncilla(residual));
        }
        let (a0, a1) = (color, color + 1);
        for e in g.edges() {
            let (i0, i1) = (2 * e.i + 1, 2 * e.i);
            let (j0, j1) = (2 * e.j + 1, 2 * e.j);
            // exp(-i gamma w (2 delta - 1)) and exp(-2 i gamma w Gamma) both
            // reduce, up to global phase, to a phase of -2 w gamma on the
            // selected basis pairs.
            let phi = -2.0 * e.w * gamma;

            // Main term: q_j ^= q_i leaves q_j = 00 iff the fields were equal.
            self.apply_cx(i0, j0)?;
            self.apply_cx(i1, j1)?;
            self.apply_x(j0)?;
            self.apply_x(j1)?;
            self.apply_controlled_phase(&[j0], j1, phi)?;
            self.apply_x(j0)?;
            self.apply_x(j1)?;
            self.apply_cx(i1, j1)?;
            self.apply_cx(i0, j0)?;

            // (q_i, q_j) = (10, 11), then (11, 10): flip the low bit of the
            // field that should read 10, mark both fields on the ancillas.
            for flip in [i1, j1] {
                self.apply_x(flip)?;
                self.apply_ccx(i0, i1, a0)?;
                self.apply_ccx(j0, j1, a1)?;
                self.apply_controlled_phase(&[a0, a1], j1, phi)?;
                self.apply_ccx(j0, j1, a1)?;
                self.apply_ccx(i0, i1, a0)?;
                self.apply_x(flip)?;
            }
        }
        Ok(())
    }

    /// Outcome probabilities over the lowest `color_qubits` qubits, summed over the rest.
    pub fn marginal_probabilities(&self, color_qubits: usize) -> Vec<f64> {
        let mask = (1usize << color_qubits.min(self.qubits)) - 1;
        let mut probs = vec![0.0; mask + 1];
        for (i, a) in self.amps.iter().enumerate() {
            probs[i & mask] += a.norm_sqr();
        }
        probs
    }

    /// `sum_z prob(z) c[z]`, tracing out any qubits above the color register.
    pub fn expectation(&self, cd: &CostDiagonal) -> Result<f64, SimError> {
        let color = 2 * cd.n();
        if color > self.qubits {
            return Err(SimError::DimensionMismatch { expected: cd.len(), got: self.amps.len() });
        }
        let mask = (1usize << color) - 1;
        let values = cd.values();
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * values[i & mask])
            .sum())
    }

    /// Draws `shots` measurement outcomes of the lowest `color_qubits`
    /// qubits. Higher qubits are marginalized out.
    pub fn sample_counts<R: Rng + ?Sized>(&self, color_qubits: usize, shots: usize, rng: &mut R) -> BTreeMap<usize, usize> {
        let probs = self.marginal_probabilities(color_qubits);
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u = rng.gen::<f64>() * acc;
            let z = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            *counts.entry(z).or_insert(0) += 1;
        }
        counts
    }
}

/// A QAOA circuit family for one graph.
#[derive(Debug, Clone)]
pub struct QaoaInstance {
    graph: Graph,
    depth: usize,
    cost: CostDiagonal,
    backend: Backend,
}

impl QaoaInstance {
    pub fn new(graph: Graph, depth: usize, backend: Backend) -> Result<Self, SimError> {
        if depth == 0 {
            return Err(SimError::ZeroDepth);
        }
        let qubits = 2 * graph.n() + backend.ancillas();
        if qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits { qubits });
        }
        let cost = CostDiagonal::build(&graph)?;
        Ok(Self { graph, depth, cost, backend })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cost(&self) -> &CostDiagonal {
        &self.cost
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn with_backend(&self, backend: Backend) -> Self {
        Self { backend, ..self.clone() }
    }

    /// Prepares `prod_k U_M(beta_k) U_C(gamma_k) |+...+>`.
    pub fn run(&self, theta: &ParameterVector) -> Result<Statevector, SimError> {
        if theta.depth() != self.depth {
            return Err(SimError::DepthMismatch { expected: self.depth, got: theta.depth() });
        }
        let n = self.graph.n();
        let mut state = Statevector::initial(n, self.backend)?;
        for (&gamma, &beta) in theta.gammas().iter().zip(theta.betas()) {
            match self.backend {
                Backend::Diagonal => state.apply_phase_diagonal(&self.cost, gamma)?,
                Backend::GateLevel => state.apply_phase_gate_level(&self.graph, gamma)?,
            }
            state.apply_mixer(2 * n, beta)?;
        }
        Ok(state)
    }

    /// `E_p(theta) = <psi(theta)| H_C |psi(theta)>`.
    pub fn energy(&self, theta: &ParameterVector) -> Result<f64, SimError> {
        self.run(theta)?.expectation(&self.cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn g4() -> Graph {
        Graph::parse_edge_list("4 5\n0 1\n0 2\n0 3\n1 2\n1 3").unwrap()
    }

    #[test]
    fn initial_states() {
        let s = Statevector::initial(1, Backend::Diagonal).unwrap();
        assert_eq!(s.amplitudes().len(), 4);
        assert!(s.amplitudes().iter().all(|&a| close(a, c(0.5, 0.0))));
        let s = Statevector::initial(2, Backend::Diagonal).unwrap();
        assert!(s.amplitudes().iter().all(|&a| close(a, c(0.25, 0.0))));
        let s = Statevector::initial(1, Backend::GateLevel).unwrap();
        assert_eq!(s.amplitudes().len(), 16);
        for (i, &a) in s.amplitudes().iter().enumerate() {
            assert!(close(a, c(if i < 4 { 0.5 } else { 0.0 }, 0.0)));
        }
        assert_eq!(Statevector::initial(0, Backend::Diagonal), Err(SimError::NoVertices));
        assert!(matches!(Statevector::initial(13, Backend::GateLevel), Err(SimError::TooManyQubits { .. })));
    }

    #[test]
    fn mixer_examples() {
        let mut s = Statevector::initial(1, Backend::Diagonal).unwrap();
        let before = s.clone();
        s.apply_mixer(2, 0.0).unwrap();
        assert_eq!(s, before);

        let mut one = Statevector::zero(1).unwrap();
        one.apply_mixer(1, FRAC_PI_2).unwrap();
        assert!(close(one.amplitudes()[0], c(0.0, 0.0)));
        assert!(close(one.amplitudes()[1], c(0.0, -1.0)));

        let mut s = Statevector::basis(2, 2).unwrap();
        s.apply_mixer(2, PI).unwrap();
        // exp(-i pi X) = -I on each qubit, (-1)^2 overall
        assert!(close(s.amplitudes()[2], c(1.0, 0.0)));
        let mut s = Statevector::basis(1, 1).unwrap();
        s.apply_mixer(1, PI).unwrap();
        assert!(close(s.amplitudes()[1], c(-1.0, 0.0)));
    }

    #[test]
    fn phase_diagonal_examples() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        let cd = CostDiagonal::build(&g).unwrap();
        let init = Statevector::initial(2, Backend::Diagonal).unwrap();
        let mut s = init.clone();
        s.apply_phase_diagonal(&cd, 0.0).unwrap();
        assert_eq!(s, init);
        let mut s = init.clone();
        s.apply_phase_diagonal(&cd, TAU).unwrap();
        for (a, b) in s.amplitudes().iter().zip(init.amplitudes()) {
            assert!(close(*a, *b));
        }
        let mut s = Statevector::basis(4, 0).unwrap();
        let gamma = 0.37;
        s.apply_phase_diagonal(&cd, gamma).unwrap();
        assert!(close(s.amplitudes()[0], Complex64::from_polar(1.0, -gamma)));
        let mut wrong = Statevector::zero(3).unwrap();
        assert!(matches!(wrong.apply_phase_diagonal(&cd, 0.1), Err(SimError::DimensionMismatch { .. })));
    }

    #[test]
    fn gate_primitives() {
        let mut s = Statevector::zero(1).unwrap();
        s.apply_x(0).unwrap();
        assert!(close(s.amplitudes()[1], c(1.0, 0.0)));

        let mut s = Statevector::basis(2, 0b01).unwrap();
        s.apply_cx(0, 1).unwrap();
        assert!(close(s.amplitudes()[0b11], c(1.0, 0.0)));

        let mut s = Statevector::basis(3, 0b011).unwrap();
        s.apply_ccx(0, 1, 2).unwrap();
        assert!(close(s.amplitudes()[0b111], c(1.0, 0.0)));

        let mut s = Statevector::basis(3, 0b111).unwrap();
        s.apply_controlled_phase(&[0, 1], 2, PI).unwrap();
        assert!(close(s.amplitudes()[0b111], c(-1.0, 0.0)));
        let mut s = Statevector::basis(3, 0b011).unwrap();
        s.apply_controlled_phase(&[0, 1], 2, PI).unwrap();
        assert!(close(s.amplitudes()[0b011], c(1.0, 0.0)));

        let mut s = Statevector::zero(1).unwrap();
        s.apply_h(0).unwrap();
        s.apply_h(0).unwrap();
        assert!(close(s.amplitudes()[0], c(1.0, 0.0)));

        assert_eq!(s.apply_x(1), Err(SimError::QubitOutOfRange { qubit: 1, qubits: 1 }));
        let mut s = Statevector::zero(2).unwrap();
        assert_eq!(s.apply_cx(1, 1), Err(SimError::QubitCollision(1)));
        assert_eq!(s.apply_controlled_phase(&[0, 1], 1, 0.3), Err(SimError::QubitCollision(1)));
    }

    #[test]
    fn gate_level_matches_diagonal_on_basis_states() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        let cd = CostDiagonal::build(&g).unwrap();
        let gamma = 0.83;
        let mut ratio: Option<Complex64> = None;
        for z in 0..16 {
            let mut diag = Statevector::basis(4, z).unwrap();
            diag.apply_phase_diagonal(&cd, gamma).unwrap();
            let mut gate = Statevector::basis(6, z).unwrap();
            gate.apply_phase_gate_level(&g, gamma).unwrap();
            assert!(gate.ancilla_mass(4) < 1e-24);
            let r = gate.amplitudes()[z] / diag.amplitudes()[z];
            assert!((r.norm() - 1.0).abs() < 1e-12);
            match ratio {
                None => ratio = Some(r),
                Some(r0) => assert!(close(r, r0), "basis {z}: {r} vs {r0}"),
            }
        }
    }

    #[test]
    fn gate_level_identity_and_dirty_ancilla() {
        let g = g4();
        let init = Statevector::initial(4, Backend::GateLevel).unwrap();
        let mut s = init.clone();
        s.apply_phase_gate_level(&g, 0.0).unwrap();
        assert_eq!(s, init);
        let mut dirty = Statevector::basis(10, 1 << 8).unwrap();
        assert!(matches!(dirty.apply_phase_gate_level(&g, 0.1), Err(SimError::DirtyAncilla(_))));
    }

    #[test]
    fn run_identity_and_depth_check() {
        let inst = QaoaInstance::new(g4(), 1, Backend::Diagonal).unwrap();
        let theta = ParameterVector::new(vec![0.0], vec![0.0]).unwrap();
        let s = inst.run(&theta).unwrap();
        assert_eq!(s, Statevector::initial(4, Backend::Diagonal).unwrap());
        let bad = ParameterVector::new(vec![0.0; 2], vec![0.0; 2]).unwrap();
        assert_eq!(inst.run(&bad), Err(SimError::DepthMismatch { expected: 1, got: 2 }));
        assert!(ParameterVector::new(vec![0.0], vec![]).is_err());
        assert!(ParameterVector::from_flat(&[]).is_err());
    }

    #[test]
    fn expectation_examples() {
        let g = g4();
        let cd = CostDiagonal::build(&g).unwrap();
        // uniform: each unit edge contributes (6 - 10) / 16
        let init = Statevector::initial(4, Backend::Diagonal).unwrap();
        assert!((init.expectation(&cd).unwrap() + 5.0 / 4.0).abs() < 1e-12);
        let (z, _) = cd.min();
        let s = Statevector::basis(8, z).unwrap();
        assert!((s.expectation(&cd).unwrap() + 5.0).abs() < 1e-12);
        let empty = CostDiagonal::build(&Graph::new(2, []).unwrap()).unwrap();
        assert_eq!(Statevector::initial(2, Backend::Diagonal).unwrap().expectation(&empty).unwrap(), 0.0);
        // gate-level register traces out the ancillas
        let gate = Statevector::initial(4, Backend::GateLevel).unwrap();
        assert!((gate.expectation(&cd).unwrap() + 1.25).abs() < 1e-12);
    }

    #[test]
    fn sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = Statevector::basis(4, 9).unwrap();
        let counts = s.sample_counts(4, 100, &mut rng);
        assert_eq!(counts.into_iter().collect::<Vec<_>>(), vec![(9, 100)]);

        let mut plus = Statevector::zero(1).unwrap();
        plus.apply_h(0).unwrap();
        let counts = plus.sample_counts(1, 4096, &mut rng);
        assert_eq!(counts.values().sum::<usize>(), 4096);
        let sigma = (4096.0f64 * 0.25).sqrt();
        assert!((counts[&0] as f64 - 2048.0).abs() < 5.0 * sigma);

        // ancillas stripped
        let s = Statevector::basis(6, (1 << 4) | 3).unwrap();
        let counts = s.sample_counts(4, 10, &mut rng);
        assert_eq!(counts.into_iter().collect::<Vec<_>>(), vec![(3, 10)]);

        let a = plus.sample_counts(1, 500, &mut ChaCha8Rng::seed_from_u64(3));
        let b = plus.sample_counts(1, 500, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    #[test]
    fn backend_round_trip_names() {
        assert_eq!("gate".parse::<Backend>().unwrap(), Backend::GateLevel);
        assert_eq!(serde_json::to_string(&Backend::GateLevel).unwrap(), "\"gate\"");
        assert!("qudit".parse::<Backend>().is_err());
    }
}
