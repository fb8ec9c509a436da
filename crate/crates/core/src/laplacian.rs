//! SO(2)-weighted Laplacian of a misaligned consensus network.
//!
//! Agent `i` applies its own rotation `D(θᵢ)` to every relative measurement,
//! so edge `(i, j)` carries weight `D(θᵢ)` in row block `i` and `D(θⱼ)` in row
//! block `j`. The resulting `L = D_out − A` is generally not symmetric.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::graph::Graph;
use crate::rotation::AngleProfile;

/// Elementwise tolerance for the construction self-checks.
pub const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LaplacianError {
    #[error("angle profile has {profile} entries but the graph has {agents} agents")]
    LengthMismatch { agents: usize, profile: usize },
    #[error("internal consistency violation: {check} off by {residual:e}")]
    Inconsistent { check: &'static str, residual: f64 },
}

fn check_len(g: &Graph, profile: &AngleProfile) -> Result<(), LaplacianError> {
    if g.n() != profile.len() {
        return Err(LaplacianError::LengthMismatch {
            agents: g.n(),
            profile: profile.len(),
        });
    }
    Ok(())
}

/// Block adjacency: block `(i, j)` is `a_ij · D(θᵢ)`.
pub fn adjacency(g: &Graph, profile: &AngleProfile) -> Result<DMatrix<f64>, LaplacianError> {
    check_len(g, profile)?;
    let n = g.n();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    for &(i, j) in g.edges() {
        a.fixed_view_mut::<2, 2>(2 * i, 2 * j).copy_from(&profile.rotation(i));
        a.fixed_view_mut::<2, 2>(2 * j, 2 * i).copy_from(&profile.rotation(j));
    }
    Ok(a)
}

/// Block out-degree: block `i` is `mᵢ · D(θᵢ)`.
pub fn out_degree(g: &Graph, profile: &AngleProfile) -> Result<DMatrix<f64>, LaplacianError> {
    check_len(g, profile)?;
    let n = g.n();
    let mut d = DMatrix::zeros(2 * n, 2 * n);
    for (i, m) in g.degrees().into_iter().enumerate() {
        d.fixed_view_mut::<2, 2>(2 * i, 2 * i)
            .copy_from(&(profile.rotation(i) * m as f64));
    }
    Ok(d)
}

/// `1ᵉ = (1, 0, 1, 0, …)`.
pub fn ones_even(n: usize) -> DVector<f64> {
    DVector::from_fn(2 * n, |r, _| if r % 2 == 0 { 1.0 } else { 0.0 })
}

/// `1ᵒ = (0, 1, 0, 1, …)`.
pub fn ones_odd(n: usize) -> DVector<f64> {
    DVector::from_fn(2 * n, |r, _| if r % 2 == 1 { 1.0 } else { 0.0 })
}

/// The weighted Laplacian together with its rotation/topology factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLaplacian {
    n: usize,
    matrix: DMatrix<f64>,
    factor_rotation: DMatrix<f64>,
    factor_topology: DMatrix<f64>,
    profile: AngleProfile,
    degrees: Vec<usize>,
    connected: bool,
}

impl WeightedLaplacian {
    /// Assembles `D_out − A` and verifies it against `blkdiag[D(θᵢ)] · L°`,
    /// the null vectors `1ᵉ`/`1ᵒ`, and zero row sums.
    pub fn build(g: &Graph, profile: &AngleProfile) -> Result<Self, LaplacianError> {
        let matrix = out_degree(g, profile)? - adjacency(g, profile)?;
        let factor_rotation = profile.block_rotation();
        let factor_topology = g.topology_laplacian();

        let lap = Self {
            n: g.n(),
            matrix,
            factor_rotation,
            factor_topology,
            profile: profile.clone(),
            degrees: g.degrees(),
            connected: g.is_connected(),
        };
        lap.self_check()?;
        Ok(lap)
    }

    fn self_check(&self) -> Result<(), LaplacianError> {
        let scale = 1.0 + self.degrees.iter().copied().max().unwrap_or(0) as f64;
        let tol = STRUCTURE_TOL * scale;

        let product = &self.factor_rotation * &self.factor_topology;
        let residual = (&self.matrix - product).amax();
        if residual > tol {
            return Err(LaplacianError::Inconsistent { check: "factorization", residual });
        }
        for (check, v) in [("null vector 1e", ones_even(self.n)), ("null vector 1o", ones_odd(self.n))] {
            let residual = (&self.matrix * v).amax();
            if residual > tol {
                return Err(LaplacianError::Inconsistent { check, residual });
            }
        }
        let residual = self
            .matrix
            .row_iter()
            .map(|row| row.sum().abs())
            .fold(0.0, f64::max);
        if residual > tol {
            return Err(LaplacianError::Inconsistent { check: "row sums", residual });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn factor_rotation(&self) -> &DMatrix<f64> {
        &self.factor_rotation
    }

    pub fn factor_topology(&self) -> &DMatrix<f64> {
        &self.factor_topology
    }

    pub fn profile(&self) -> &AngleProfile {
        &self.profile
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Induced 1-norm (max absolute column sum).
    pub fn norm_one(&self) -> f64 {
        self.matrix
            .column_iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Permutation taking agent-major stacking `(x₁, y₁, x₂, y₂, …)` to
/// coordinate-major `(x₁, …, xₙ, y₁, …, yₙ)`.
pub fn coordinate_major_permutation(n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        p[(i, 2 * i)] = 1.0;
        p[(n + i, 2 * i + 1)] = 1.0;
    }
    p
}
