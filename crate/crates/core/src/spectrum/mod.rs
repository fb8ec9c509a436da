//! Spectra of the weighted Laplacian and what they say about stability.
//!
//! Classification first tries the angle-only sufficient conditions (every
//! `cos θᵢ` positive, every one negative, or every one zero) and then checks
//! the computed eigenvalues against the verdict. Mixed-sign profiles have no
//! such condition and are judged from the eigenvalues alone.

mod matching;
pub mod qr;

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::laplacian::{LaplacianError, WeightedLaplacian};
use crate::rotation::AngleProfile;

pub use matching::{match_spectra, min_cost_assignment, SpectrumMatch};

/// Structural zeros: `|λ| ≤ ZERO_TOL · ‖L‖₁`.
pub const ZERO_TOL: f64 = 1e-8;
/// Absolute threshold on `Re λ` separating stable, unstable and marginal.
pub const STABILITY_TOL: f64 = 1e-8;
/// Threshold on `cos θᵢ` for the angle-only conditions.
pub const ANGLE_TOL: f64 = 1e-12;
/// Conjugate pairing tolerance for post-processing.
pub const CONJUGATE_TOL: f64 = 1e-9;
/// A theorem verdict is contradicted only by an eigenvalue this far (relative
/// to `max(‖L‖₁, 1)`) on the wrong side of the imaginary axis. Defective
/// eigenvalues carry `O(√ε)` error, well above `STABILITY_TOL`.
pub const CONTRADICTION_TOL: f64 = 1e-6;
/// Slack on Gershgorin disk membership.
pub const DISK_SLACK: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("matrix is {rows}×{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("QR iteration did not converge after {sweeps} sweeps ({remaining} eigenvalues left)")]
    NoConvergence { remaining: usize, sweeps: usize },
    #[error("complex eigenvalue {0} has no conjugate partner")]
    UnpairedConjugate(Complex64),
    #[error(
        "{basis} predicts {expected} but eigenvalue {witness} contradicts it; \
         eigensolver or Laplacian assembly is wrong"
    )]
    Inconsistent {
        basis: Basis,
        expected: Stability,
        witness: Complex64,
    },
    #[error(transparent)]
    Laplacian(#[from] LaplacianError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Consensus,
    Divergent,
    Oscillatory,
    Indeterminate,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Consensus => "Consensus",
            Self::Divergent => "Divergent",
            Self::Oscillatory => "Oscillatory",
            Self::Indeterminate => "Indeterminate",
        })
    }
}

/// Which argument backs a stability verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Every `cos θᵢ > 0` on a connected graph.
    #[serde(rename = "theorem1")]
    Theorem1,
    /// Every `cos θᵢ < 0` on a connected graph.
    #[serde(rename = "theorem3-negative")]
    Theorem3Negative,
    /// Every `cos θᵢ = 0` on a connected graph.
    #[serde(rename = "theorem3-imaginary")]
    Theorem3Imaginary,
    /// Read off the computed eigenvalues.
    #[serde(rename = "spectral")]
    Spectral,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Theorem1 => "Theorem1",
            Self::Theorem3Negative => "Theorem3-negative",
            Self::Theorem3Imaginary => "Theorem3-imaginary",
            Self::Spectral => "Spectral",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityClass {
    pub stability: Stability,
    pub basis: Basis,
    /// Set when eigenvalues beyond the two structural zeros sit within
    /// `STABILITY_TOL` of the imaginary axis.
    pub marginal: bool,
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {}", self.stability, self.basis)?;
        if self.marginal {
            f.write_str(" (marginal)")?;
        }
        Ok(())
    }
}

/// Eigenvalues of `L_out`, sorted by real then imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<Complex64>,
    zero_tol: f64,
    zero_count: usize,
    classification: StabilityClass,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn zero_count(&self) -> usize {
        self.zero_count
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn classification(&self) -> StabilityClass {
        self.classification
    }

    /// Eigenvalues with the two smallest-modulus entries removed.
    pub fn nonstructural(&self) -> Vec<Complex64> {
        without_structural_zeros(&self.eigenvalues)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest `|Re λ|` among non-structural eigenvalues, if any.
    pub fn slowest_rate(&self) -> Option<f64> {
        self.nonstructural()
            .iter()
            .map(|z| z.re.abs())
            .min_by(f64::total_cmp)
    }
}

pub fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(cmp_complex);
}

fn without_structural_zeros(values: &[Complex64]) -> Vec<Complex64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].norm().total_cmp(&values[b].norm()));
    let mut rest: Vec<Complex64> = idx.iter().skip(2).map(|&i| values[i]).collect();
    sort_spectrum(&mut rest);
    rest
}

/// Snaps near-conjugate pairs onto exact conjugates and near-real values onto
/// the real axis.
fn enforce_conjugate_pairs(values: &mut [Complex64]) -> Result<(), SpectrumError> {
    let mut taken = vec![false; values.len()];
    for i in 0..values.len() {
        if taken[i] {
            continue;
        }
        let z = values[i];
        if z.im.abs() <= CONJUGATE_TOL {
            values[i].im = 0.0;
            taken[i] = true;
            continue;
        }
        let partner = (0..values.len())
            .filter(|&j| j != i && !taken[j])
            .map(|j| (j, (values[j] - z.conj()).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match partner {
            Some((j, d)) if d <= CONJUGATE_TOL * (1.0 + z.norm()) => {
                let re = 0.5 * (z.re + values[j].re);
                let im = 0.5 * (z.im - values[j].im);
                values[i] = Complex64::new(re, im);
                values[j] = Complex64::new(re, -im);
                taken[i] = true;
                taken[j] = true;
            }
            _ => return Err(SpectrumError::UnpairedConjugate(z)),
        }
    }
    Ok(())
}

/// Computes the spectrum of `L_out` and classifies it.
pub fn eigenvalues(lap: &WeightedLaplacian) -> Result<Spectrum, SpectrumError> {
    let mut values = qr::eigenvalues(lap.matrix())?;
    enforce_conjugate_pairs(&mut values)?;
    sort_spectrum(&mut values);
    let zero_tol = ZERO_TOL * lap.norm_one();
    let zero_count = values.iter().filter(|z| z.norm() <= zero_tol).count();
    let classification = classify_values(lap.profile(), lap.is_connected(), &values, lap.norm_one())?;
    Ok(Spectrum {
        eigenvalues: values,
        zero_tol,
        zero_count,
        classification,
    })
}

/// Numerical rank: singular values above `tol · σ_max`.
pub fn rank(lap: &WeightedLaplacian, tol: f64) -> usize {
    matrix_rank(lap.matrix(), tol)
}

/// Singular values above `tol · σ_max`.
pub fn matrix_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let sv = m.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// Spectral definition of the stability classes, ignoring the angles.
/// Eigenvalues within `zero_tol` of the origin never count as oscillatory
/// modes, even past the two structural ones.
pub fn spectral_verdict(values: &[Complex64], zero_count: usize, zero_tol: f64) -> StabilityClass {
    let rest = without_structural_zeros(values);
    let stability = if rest.iter().any(|z| z.re < -STABILITY_TOL) {
        Stability::Divergent
    } else if zero_count == 2 && rest.iter().all(|z| z.re > STABILITY_TOL) {
        Stability::Consensus
    } else if rest.iter().all(|z| z.re.abs() <= STABILITY_TOL)
        && rest.iter().any(|z| z.norm() > zero_tol && z.im.abs() > STABILITY_TOL)
    {
        Stability::Oscillatory
    } else {
        Stability::Indeterminate
    };
    let marginal = stability == Stability::Indeterminate
        && (zero_count > 2 || rest.iter().any(|z| z.re.abs() <= STABILITY_TOL));
    StabilityClass {
        stability,
        basis: Basis::Spectral,
        marginal,
    }
}

/// Which angle-only condition applies, if any.
pub fn theorem_basis(g_connected: bool, profile: &AngleProfile) -> Option<(Basis, Stability)> {
    if !g_connected || profile.len() < 2 {
        return None;
    }
    let cos: Vec<f64> = profile.cosines().collect();
    if cos.iter().all(|&c| c > ANGLE_TOL) {
        Some((Basis::Theorem1, Stability::Consensus))
    } else if cos.iter().all(|&c| c < -ANGLE_TOL) {
        Some((Basis::Theorem3Negative, Stability::Divergent))
    } else if cos.iter().all(|&c| c.abs() <= ANGLE_TOL) {
        Some((Basis::Theorem3Imaginary, Stability::Oscillatory))
    } else {
        None
    }
}

fn classify_values(
    profile: &AngleProfile,
    connected: bool,
    values: &[Complex64],
    norm: f64,
) -> Result<StabilityClass, SpectrumError> {
    let zero_tol = ZERO_TOL * norm;
    let zero_count = values.iter().filter(|z| z.norm() <= zero_tol).count();
    let spectral = spectral_verdict(values, zero_count, zero_tol);
    let Some((basis, expected)) = theorem_basis(connected, profile) else {
        return Ok(spectral);
    };
    let rest = without_structural_zeros(values);
    let bound = CONTRADICTION_TOL * norm.max(1.0);
    let witness = match expected {
        Stability::Consensus => rest.iter().find(|z| z.re < -bound),
        Stability::Divergent => rest.iter().find(|z| z.re > bound),
        _ => rest.iter().find(|z| z.re.abs() > bound),
    };
    if let Some(&witness) = witness {
        return Err(SpectrumError::Inconsistent { basis, expected, witness });
    }
    if spectral.stability == expected {
        Ok(StabilityClass {
            stability: expected,
            basis,
            marginal: false,
        })
    } else {
        // right side of the axis, but too close to call
        Ok(StabilityClass {
            stability: Stability::Indeterminate,
            basis: Basis::Spectral,
            marginal: true,
        })
    }
}

/// Classifies a spectrum computed from `build(g, profile)`.
pub fn classify(g: &Graph, profile: &AngleProfile, s: &Spectrum) -> Result<StabilityClass, SpectrumError> {
    let lap = WeightedLaplacian::build(g, profile)?;
    classify_values(profile, g.is_connected(), &s.eigenvalues, lap.norm_one())
}

/// Builds the Laplacian and returns its classified spectrum.
pub fn analyze(g: &Graph, profile: &AngleProfile) -> Result<Spectrum, SpectrumError> {
    eigenvalues(&WeightedLaplacian::build(g, profile)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    /// Zero-based agent index.
    pub agent: usize,
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius + DISK_SLACK
    }
}

/// Union of the per-agent block-Gershgorin disks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GershgorinRegion {
    pub disks: Vec<Disk>,
}

impl GershgorinRegion {
    pub fn contains(&self, z: Complex64) -> bool {
        self.disks.iter().any(|d| d.contains(z))
    }
}

/// Two disks per agent, centered at `mᵢ e^{±jθᵢ}` with radius `mᵢ`.
pub fn gershgorin(g: &Graph, profile: &AngleProfile) -> Result<GershgorinRegion, SpectrumError> {
    if g.n() != profile.len() {
        return Err(LaplacianError::LengthMismatch {
            agents: g.n(),
            profile: profile.len(),
        }
        .into());
    }
    let disks = g
        .degrees()
        .into_iter()
        .zip(profile.angles())
        .enumerate()
        .flat_map(|(agent, (m, &theta))| {
            let m = m as f64;
            let upper = Complex64::from_polar(m, theta);
            [upper, upper.conj()].map(|center| Disk {
                agent,
                center,
                radius: m,
            })
        })
        .collect();
    Ok(GershgorinRegion { disks })
}

/// Spectrum predicted for a common angle: each scalar Laplacian eigenvalue
/// `μ` contributes `μ e^{jθ}` and `μ e^{−jθ}`.
pub fn common_angle_spectrum(g: &Graph, theta: f64) -> Vec<Complex64> {
    let mu = g.scalar_laplacian().symmetric_eigenvalues();
    let mut out: Vec<Complex64> = mu
        .iter()
        .flat_map(|&m| {
            let m = if m.abs() < 1e-13 { 0.0 } else { m };
            let z = Complex64::from_polar(m, theta);
            [z, z.conj()]
        })
        .collect();
    sort_spectrum(&mut out);
    out
}

/// Closed-form spectrum of the two-agent network.
pub fn two_agent_exact(theta1: f64, theta2: f64) -> Vec<Complex64> {
    let z = Complex64::new(theta1.cos() + theta2.cos(), theta1.sin() + theta2.sin());
    let mut out = vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), z, z.conj()];
    sort_spectrum(&mut out);
    out
}

/// Two agents reach consensus exactly when `cos θ₁ + cos θ₂ > 0`.
pub fn two_agent_consensus(theta1: f64, theta2: f64) -> bool {
    theta1.cos() + theta2.cos() > 0.0
}

/// Closed-form spectrum of the complete graph on three agents with
/// `θ₂ = θ₃`.
pub fn three_agent_exact(theta1: f64, theta2: f64) -> Vec<Complex64> {
    let a = Complex64::from_polar(3.0, theta2);
    let b = Complex64::new(
        2.0 * theta1.cos() + theta2.cos(),
        2.0 * theta1.sin() + theta2.sin(),
    );
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero, zero, a, a.conj(), b, b.conj()];
    sort_spectrum(&mut out);
    out
}

/// Consensus on `K₃` with `θ₂ = θ₃` holds exactly when `cos θ₂ > 0` and
/// `2 cos θ₁ + cos θ₂ > 0`.
pub fn three_agent_consensus(theta1: f64, theta2: f64) -> bool {
    theta2.cos() > 0.0 && 2.0 * theta1.cos() + theta2.cos() > 0.0
}
