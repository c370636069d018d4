//! Binary encoding of max-3-cut and the diagonal cost Hamiltonian.
//!
//! Each vertex uses two qubits. Vertex `i` occupies bits `2i` and `2i + 1`
//! of a basis index; the higher bit is `q_i^0`, the lower bit `q_i^1`, and
//! vertex 0 sits in the least significant pair. The two-bit field
//! `(q^0 q^1)` maps to colors as `00 -> 0`, `01 -> 1`, `10 -> 2`, `11 -> 2`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Coloring, Graph};

/// Largest vertex count for dense `4^n` storage.
pub const MAX_DENSE_VERTICES: usize = 13;

/// Color count handled by the encoding.
pub const COLORS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{n} vertices exceed the dense limit of {MAX_DENSE_VERTICES}")]
    TooManyVertices { n: usize },
    #[error("basis index {z} out of range for {n} vertices")]
    IndexOutOfRange { z: usize, n: usize },
}

/// 4x4 table of per-edge energies indexed by the two vertices' bit fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionTable(pub [[f64; 4]; 4]);

impl InteractionTable {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.0[a][b]
    }
}

/// `+1` when both fields encode the same color, `-1` otherwise.
pub fn interaction_table() -> InteractionTable {
    InteractionTable([
        [1.0, -1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0, -1.0],
        [-1.0, -1.0, 1.0, 1.0],
        [-1.0, -1.0, 1.0, 1.0],
    ])
}

#[inline]
pub fn decode_vertex(bits: usize) -> usize {
    match bits & 0b11 {
        0b00 => 0,
        0b01 => 1,
        _ => 2,
    }
}

#[inline]
pub(crate) fn field(z: usize, vertex: usize) -> usize {
    (z >> (2 * vertex)) & 0b11
}

pub fn decode_bitstring(z: usize, n: usize) -> Result<Coloring, ModelError> {
    if n > MAX_DENSE_VERTICES || z >= 1usize << (2 * n) {
        return Err(ModelError::IndexOutOfRange { z, n });
    }
    Ok(Coloring::new_unchecked((0..n).map(|v| decode_vertex(field(z, v))).collect()))
}

/// Renders a basis index with vertex 0's pair leftmost and `q^0` before `q^1`.
pub fn render_bitstring(z: usize, n: usize) -> String {
    let mut s = String::with_capacity(2 * n);
    for v in 0..n {
        let f = field(z, v);
        s.push(if f & 0b10 != 0 { '1' } else { '0' });
        s.push(if f & 0b01 != 0 { '1' } else { '0' });
    }
    s
}

/// Diagonal of the cost Hamiltonian over the `4^n` color-qubit basis states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostDiagonal {
    n: usize,
    values: Vec<f64>,
}

impl CostDiagonal {
    pub fn build(g: &Graph) -> Result<Self, ModelError> {
        let n = g.n();
        if n > MAX_DENSE_VERTICES {
            return Err(ModelError::TooManyVertices { n });
        }
        let d = interaction_table();
        let mut values = vec![0.0; 1 << (2 * n)];
        for (z, v) in values.iter_mut().enumerate() {
            *v = g
                .edges()
                .iter()
                .fold(0.0, |acc, e| acc + e.w * d.get(field(z, e.i), field(z, e.j)));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Lowest diagonal entry and the first index attaining it.
    pub fn min(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (z, v)| if v < best.1 { (z, v) } else { best })
    }
}

/// Converts an energy expectation into an expected cut: `(W - E) / 2`.
pub fn cut_from_energy(energy: f64, g: &Graph) -> f64 {
    (g.total_weight() - energy) / 2.0
}
