//! Closed-form consensus point.
//!
//! Along `ṗ = −blkdiag[D(θᵢ)] (𝓛 ⊗ I₂) p` the quantity `Σᵢ D(θᵢ)ᵀ pᵢ(t)` never
//! changes, because `D(θᵢ)ᵀ D(θᵢ) = I₂` and `1ᵀ𝓛 = 0`. Once all agents sit at
//! a common point `p*`, that quantity equals `(Σᵢ D(θᵢ)ᵀ) p*`, which pins
//! `p*` down whenever the 2×2 sum is invertible.

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::graph::Graph;
use crate::rotation::AngleProfile;
use crate::spectrum::{Stability, StabilityClass};

/// Determinant guard on `Σᵢ D(θᵢ)ᵀ`.
pub const DET_GUARD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictError {
    #[error("state has {got} coordinates, expected {expected} for {agents} agents")]
    LengthMismatch { agents: usize, expected: usize, got: usize },
    #[error("graph is disconnected; agents cannot agree on a single point")]
    Disconnected,
    #[error("prediction unavailable: sum of transposed rotations is singular (det = {det:e})")]
    Singular { det: f64 },
    #[error(
        "prediction unavailable: some cos θᵢ ≤ 0 and the spectrum says {0}, not Consensus"
    )]
    NotConvergent(Stability),
    #[error("prediction unavailable: some cos θᵢ ≤ 0 and no stability verdict was supplied")]
    OutsideHypothesis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusPrediction {
    /// Predicted common position.
    pub point: Vector2<f64>,
    /// `(Σᵢ D(θᵢ)ᵀ)⁻¹`.
    pub mixing: Matrix2<f64>,
    /// `Σᵢ D(θᵢ)ᵀ pᵢ(0)`.
    pub conserved_value: Vector2<f64>,
    /// True when some `cos θᵢ ≤ 0` and the prediction rests on a spectral
    /// Consensus verdict rather than the all-positive-cosine hypothesis.
    pub extrapolated: bool,
}

fn check_state(profile: &AngleProfile, p: &[f64]) -> Result<(), PredictError> {
    if p.len() != 2 * profile.len() {
        return Err(PredictError::LengthMismatch {
            agents: profile.len(),
            expected: 2 * profile.len(),
            got: p.len(),
        });
    }
    Ok(())
}

/// `Σᵢ D(θᵢ)ᵀ pᵢ` for a stacked state `p = (x₁, y₁, …)`.
pub fn conserved_functional(profile: &AngleProfile, p: &[f64]) -> Result<Vector2<f64>, PredictError> {
    check_state(profile, p)?;
    Ok(p.chunks_exact(2)
        .enumerate()
        .map(|(i, xy)| profile.rotation(i).transpose() * Vector2::new(xy[0], xy[1]))
        .sum())
}

/// `Σᵢ D(θᵢ)ᵀ`, a scaled rotation `[[C, S], [−S, C]]`.
pub fn rotation_sum(profile: &AngleProfile) -> Matrix2<f64> {
    (0..profile.len()).map(|i| profile.rotation(i).transpose()).sum()
}

fn invert(m: &Matrix2<f64>) -> Result<Matrix2<f64>, PredictError> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det.abs() <= DET_GUARD {
        return Err(PredictError::Singular { det });
    }
    Ok(Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

fn predict(
    g: &Graph,
    profile: &AngleProfile,
    p0: &[f64],
    extrapolated: bool,
) -> Result<ConsensusPrediction, PredictError> {
    let conserved_value = conserved_functional(profile, p0)?;
    let mixing = invert(&rotation_sum(profile))?;
    debug_assert_eq!(g.n(), profile.len());
    Ok(ConsensusPrediction {
        point: mixing * conserved_value,
        mixing,
        conserved_value,
        extrapolated,
    })
}

/// Consensus point under the hypothesis that every `cos θᵢ > 0`.
pub fn consensus_point(
    g: &Graph,
    profile: &AngleProfile,
    p0: &[f64],
) -> Result<ConsensusPrediction, PredictError> {
    consensus_point_with(g, profile, p0, None)
}

/// Like [`consensus_point`], but a Consensus verdict lets the formula run for
/// profiles with some `cos θᵢ ≤ 0`; the result is then flagged as
/// extrapolated. The verdict is ignored when every `cos θᵢ > 0`.
pub fn consensus_point_with(
    g: &Graph,
    profile: &AngleProfile,
    p0: &[f64],
    verdict: Option<StabilityClass>,
) -> Result<ConsensusPrediction, PredictError> {
    check_state(profile, p0)?;
    if !g.is_connected() {
        return Err(PredictError::Disconnected);
    }
    let hypothesis = profile.cosines().all(|c| c > 0.0);
    if !hypothesis {
        match verdict {
            Some(class) if class.stability == Stability::Consensus => {}
            Some(class) => return Err(PredictError::NotConvergent(class.stability)),
            None => return Err(PredictError::OutsideHypothesis),
        }
    }
    predict(g, profile, p0, !hypothesis)
}
