//! Weighted undirected graphs, k-cut evaluation and the exact brute-force
//! oracle for the optimal cut.
//!
//! Edge-list text format:
//!
//! ```text
//! # comment
//! n m
//! i j [w]
//! ...
//! ```
//!
//! Indices are 0-based, the weight token is optional (defaults to `1.0`),
//! and tokens are whitespace separated. Edges are stored once with `i < j`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest `k^n` the brute-force enumeration accepts.
pub const BRUTE_FORCE_LIMIT: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: malformed input: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: negative weight {weight}")]
    NegativeWeight { line: usize, weight: f64 },
    #[error("line {line}: duplicate edge ({i}, {j})")]
    DuplicateEdge { line: usize, i: usize, j: usize },
    #[error("line {line}: vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("declared {declared} edges but found {found}")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("coloring has length {got}, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("color {color} at vertex {vertex} is outside [0, {k})")]
    ColorOutOfRange { vertex: usize, color: usize, k: usize },
    #[error("instance too large for enumeration: {k}^{n} exceeds {limit}")]
    TooLarge { k: usize, n: usize, limit: u64 },
    #[error("need at least one color")]
    NoColors,
    #[error("optimal cut must be positive, got {0}")]
    NonPositiveOptimum(f64),
}

/// Undirected edge with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Weighted undirected graph. Immutable once constructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Builds a validated graph. Edges are canonicalized to `i < j`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self, GraphError> {
        let mut g = GraphBuilder::new(n)?;
        for (line, (i, j, w)) in edges.into_iter().enumerate() {
            g.push(line + 1, i, j, w)?;
        }
        Ok(g.finish())
    }

    /// Parses the edge-list format described in the module docs.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut builder: Option<(GraphBuilder, usize)> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match builder.as_mut() {
                None => {
                    if tokens.len() != 2 {
                        return Err(malformed(line, "header must be \"n m\""));
                    }
                    let n = parse_index(tokens[0], line, "vertex count")?;
                    let m = parse_index(tokens[1], line, "edge count")?;
                    builder = Some((GraphBuilder::new(n)?, m));
                }
                Some((b, _)) => {
                    if tokens.len() != 2 && tokens.len() != 3 {
                        return Err(malformed(line, "edge line must be \"i j [w]\""));
                    }
                    let i = parse_index(tokens[0], line, "vertex index")?;
                    let j = parse_index(tokens[1], line, "vertex index")?;
                    let w = match tokens.get(2) {
                        Some(tok) => f64::from_str(tok)
                            .ok()
                            .filter(|w| w.is_finite())
                            .ok_or_else(|| malformed(line, &format!("invalid weight {tok:?}")))?,
                        None => 1.0,
                    };
                    b.push(line, i, j, w)?;
                }
            }
        }
        let (b, declared) = builder.ok_or_else(|| malformed(0, "missing \"n m\" header"))?;
        if b.edges.len() != declared {
            return Err(GraphError::EdgeCountMismatch { declared, found: b.edges.len() });
        }
        Ok(b.finish())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().fold(0.0, |acc, e| acc + e.w)
    }

    /// Weight of edges whose endpoints receive different colors.
    pub fn cut_value(&self, coloring: &Coloring) -> Result<f64, GraphError> {
        if coloring.len() != self.n {
            return Err(GraphError::LengthMismatch { expected: self.n, got: coloring.len() });
        }
        Ok(self.cut_unchecked(coloring.as_slice()))
    }

    pub(crate) fn cut_unchecked(&self, colors: &[usize]) -> f64 {
        self.edges
            .iter()
            .filter(|e| colors[e.i] != colors[e.j])
            .fold(0.0, |acc, e| acc + e.w)
    }

    /// Exhaustive max-k-cut. Returns the lexicographically smallest coloring
    /// among all optimal ones.
    pub fn brute_force_max_cut(&self, k: usize) -> Result<(Coloring, f64), GraphError> {
        if k == 0 {
            return Err(GraphError::NoColors);
        }
        let total = checked_pow(k, self.n)
            .filter(|&t| t <= BRUTE_FORCE_LIMIT)
            .ok_or(GraphError::TooLarge { k, n: self.n, limit: BRUTE_FORCE_LIMIT })?;

        // Rank r encodes the coloring with vertex 0 as the most significant
        // base-k digit, so rank order is lexicographic order.
        let decode = |mut r: u64, buf: &mut [usize]| {
            for slot in buf.iter_mut().rev() {
                *slot = (r % k as u64) as usize;
                r /= k as u64;
            }
        };
        const CHUNK: u64 = 1 << 14;
        let chunks = total.div_ceil(CHUNK);
        let (best_rank, best_cut) = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut buf = vec![0usize; self.n];
                let mut best = (u64::MAX, f64::NEG_INFINITY);
                for r in c * CHUNK..((c + 1) * CHUNK).min(total) {
                    decode(r, &mut buf);
                    let cut = self.cut_unchecked(&buf);
                    if cut > best.1 {
                        best = (r, cut);
                    }
                }
                best
            })
            .reduce(
                || (u64::MAX, f64::NEG_INFINITY),
                |a, b| {
                    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                        b
                    } else {
                        a
                    }
                },
            );
        let mut colors = vec![0usize; self.n];
        decode(best_rank, &mut colors);
        Ok((Coloring::new_unchecked(colors), best_cut))
    }
}

struct GraphBuilder {
    n: usize,
    edges: Vec<Edge>,
    seen: HashSet<(usize, usize)>,
}

impl GraphBuilder {
    fn new(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        Ok(Self { n, edges: Vec::new(), seen: HashSet::new() })
    }

    fn push(&mut self, line: usize, i: usize, j: usize, w: f64) -> Result<(), GraphError> {
        for v in [i, j] {
            if v >= self.n {
                return Err(GraphError::VertexOutOfRange { line, vertex: v, n: self.n });
            }
        }
        if i == j {
            return Err(GraphError::SelfLoop { line, vertex: i });
        }
        if w.is_nan() || w < 0.0 {
            return Err(GraphError::NegativeWeight { line, weight: w });
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if !self.seen.insert((a, b)) {
            return Err(GraphError::DuplicateEdge { line, i: a, j: b });
        }
        self.edges.push(Edge { i: a, j: b, w });
        Ok(())
    }

    fn finish(self) -> Graph {
        Graph { n: self.n, edges: self.edges }
    }
}

fn malformed(line: usize, reason: &str) -> GraphError {
    GraphError::Malformed { line, reason: reason.to_string() }
}

fn parse_index(tok: &str, line: usize, what: &str) -> Result<usize, GraphError> {
    tok.parse::<usize>()
        .map_err(|_| malformed(line, &format!("invalid {what} {tok:?}")))
}

fn checked_pow(k: usize, n: usize) -> Option<u64> {
    (k as u64).checked_pow(u32::try_from(n).ok()?)
}

impl FromStr for Graph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_edge_list(s)
    }
}

impl fmt::Display for Graph {
    /// Writes the graph back in edge-list format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.edges.len())?;
        for e in &self.edges {
            writeln!(f, "{} {} {}", e.i, e.j, e.w)?;
        }
        Ok(())
    }
}

/// Assignment of a color label to every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coloring(Vec<usize>);

impl Coloring {
    /// Validates every label against `k`.
    pub fn new(colors: Vec<usize>, k: usize) -> Result<Self, GraphError> {
        if let Some((vertex, &color)) = colors.iter().enumerate().find(|(_, &c)| c >= k) {
            return Err(GraphError::ColorOutOfRange { vertex, color, k });
        }
        Ok(Self(colors))
    }

    pub(crate) fn new_unchecked(colors: Vec<usize>) -> Self {
        Self(colors)
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

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Expected cut relative to the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub optimal_cut: f64,
    pub expected_cut: f64,
    pub ratio: f64,
}

pub fn approximation_ratio(expected_cut: f64, optimal_cut: f64) -> Result<ApproximationReport, GraphError> {
    if !(optimal_cut > 0.0) {
        return Err(GraphError::NonPositiveOptimum(optimal_cut));
    }
    Ok(ApproximationReport { optimal_cut, expected_cut, ratio: expected_cut / optimal_cut })
}
