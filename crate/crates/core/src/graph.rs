//! Undirected interaction topology and its misalignment-free Laplacian.
//!
//! Agents are indexed from zero here. Scenario files and reports shift to
//! one-based numbering at the boundary.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("a graph needs at least one agent")]
    Empty,
    #[error("edge ({i}, {j}) references an agent outside 0..{n}")]
    OutOfRange { i: usize, j: usize, n: usize },
    #[error("self-loop on agent {0} is not allowed")]
    SelfLoop(usize),
    #[error("agent index {index} out of range for {n} agents")]
    NoSuchAgent { index: usize, n: usize },
}

/// Undirected graph with 0/1 edge weights.
///
/// Edges are stored as sorted `(min, max)` pairs without duplicates, so two
/// graphs built from the same edge set in any order compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph on `n` agents. Duplicate pairs (in either orientation)
    /// collapse to one edge.
    pub fn new_undirected(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(GraphError::OutOfRange { i, j, n });
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            set.insert((i.min(j), i.max(j)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self { n, edges, neighbors })
    }

    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        Self::new_undirected(n, &edges)
    }

    pub fn path(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new_undirected(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> Result<&[usize], GraphError> {
        self.neighbors
            .get(i)
            .map(Vec::as_slice)
            .ok_or(GraphError::NoSuchAgent { index: i, n: self.n })
    }

    /// Number of neighbors of agent `i`.
    pub fn degree(&self, i: usize) -> Result<usize, GraphError> {
        self.neighbors(i).map(<[usize]>::len)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i.min(j), i.max(j))).is_ok()
    }

    /// Scalar n×n adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// Scalar n×n graph Laplacian `D - A`.
    pub fn scalar_laplacian(&self) -> DMatrix<f64> {
        let mut l = -self.adjacency();
        for (i, list) in self.neighbors.iter().enumerate() {
            l[(i, i)] = list.len() as f64;
        }
        l
    }

    /// The 2n×2n topology Laplacian: every scalar Laplacian entry expanded to
    /// that entry times `I₂`, under the agent-major stacking
    /// `p = (x₁, y₁, x₂, y₂, …)`.
    pub fn topology_laplacian(&self) -> DMatrix<f64> {
        let scalar = self.scalar_laplacian();
        DMatrix::from_fn(2 * self.n, 2 * self.n, |r, c| {
            if r % 2 == c % 2 {
                scalar[(r / 2, c / 2)]
            } else {
                0.0
            }
        })
    }

    /// Breadth-first reachability from agent 0.
    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut components = 0;
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.neighbors[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        components
    }
}
