//! Fixed-step RK4 integration of `ṗ = −L_out p` and outcome detection.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::laplacian::{LaplacianError, WeightedLaplacian};
use crate::rotation::{AngleError, AngleLiteral, AngleProfile};
use crate::spectrum::{qr, SpectrumError};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_HORIZON: f64 = 100.0;
pub const DEFAULT_RECORD_STRIDE: usize = 10;
/// Radius of the circle the default initial positions sit on.
pub const DEFAULT_RADIUS: f64 = 2.0;
/// Largest accepted `h·ρ(L_out)`. RK4 is stable on the negative real axis up
/// to about 2.785.
pub const STEP_LIMIT: f64 = 2.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvalidScenario {
    #[error("graph has {graph} agents but {angles} angles were given")]
    AngleCount { graph: usize, angles: usize },
    #[error("{got} initial positions given for {n} agents")]
    InitialCount { n: usize, got: usize },
    #[error("initial position of agent {agent} is not finite")]
    NonFiniteInitial { agent: usize },
    #[error("horizon must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("step must be positive and finite, got {0}")]
    Step(f64),
    #[error("step {step} exceeds horizon {horizon}")]
    StepExceedsHorizon { step: f64, horizon: f64 },
    #[error(
        "step {step} is too large for spectral radius {radius:.6} \
         (h·ρ = {product:.3} > {STEP_LIMIT}); use a step of at most {suggested:e}"
    )]
    Unstable {
        step: f64,
        radius: f64,
        product: f64,
        suggested: f64,
    },
    #[error("record stride must be at least 1")]
    Stride,
    #[error(transparent)]
    Angle(#[from] AngleError),
    #[error(transparent)]
    Laplacian(#[from] LaplacianError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// A validated simulation setup.
#[derive(Debug, Clone)]
pub struct Scenario {
    label: String,
    graph: Graph,
    angles: Vec<AngleLiteral>,
    laplacian: WeightedLaplacian,
    radius: f64,
    initial: Vec<[f64; 2]>,
    horizon: f64,
    step: f64,
    record_stride: usize,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
            && self.graph == other.graph
            && self.angles == other.angles
            && self.initial == other.initial
            && self.horizon == other.horizon
            && self.step == other.step
            && self.record_stride == other.record_stride
    }
}

/// Agent `i` starts at angle `2πi/n` on a circle of radius 2.
pub fn default_initial(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            [DEFAULT_RADIUS * a.cos(), DEFAULT_RADIUS * a.sin()]
        })
        .collect()
}

/// Rounds down to one significant digit.
fn round_down(x: f64) -> f64 {
    let scale = 10f64.powf(x.log10().floor());
    (x / scale).floor() * scale
}

impl Scenario {
    /// Builds a scenario with the default horizon, step and record stride.
    /// Without explicit positions, agents start on a circle.
    pub fn new(
        label: impl Into<String>,
        graph: Graph,
        angles: Vec<AngleLiteral>,
        initial: Option<Vec<[f64; 2]>>,
    ) -> Result<Self, InvalidScenario> {
        let n = graph.n();
        if angles.len() != n {
            return Err(InvalidScenario::AngleCount { graph: n, angles: angles.len() });
        }
        let initial = initial.unwrap_or_else(|| default_initial(n));
        if initial.len() != n {
            return Err(InvalidScenario::InitialCount { n, got: initial.len() });
        }
        if let Some(agent) = initial.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(InvalidScenario::NonFiniteInitial { agent: agent + 1 });
        }
        let profile = AngleProfile::new(angles.iter().map(AngleLiteral::radians).collect())?;
        let laplacian = WeightedLaplacian::build(&graph, &profile)?;
        let radius = qr::eigenvalues(laplacian.matrix())?
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let scenario = Self {
            label: label.into(),
            graph,
            angles,
            laplacian,
            radius,
            initial,
            horizon: DEFAULT_HORIZON,
            step: DEFAULT_STEP,
            record_stride: DEFAULT_RECORD_STRIDE,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Scenario with plain radian angles.
    pub fn from_radians(
        label: impl Into<String>,
        graph: Graph,
        theta: &[f64],
        initial: Option<Vec<[f64; 2]>>,
    ) -> Result<Self, InvalidScenario> {
        let angles = theta
            .iter()
            .map(|&t| AngleLiteral::from_radians(t))
            .collect::<Result<_, _>>()?;
        Self::new(label, graph, angles, initial)
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self, InvalidScenario> {
        self.horizon = horizon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_step(mut self, step: f64) -> Result<Self, InvalidScenario> {
        self.step = step;
        self.validate()?;
        Ok(self)
    }

    pub fn with_record_stride(mut self, stride: usize) -> Result<Self, InvalidScenario> {
        self.record_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn validate(&self) -> Result<(), InvalidScenario> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(InvalidScenario::Horizon(self.horizon));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(InvalidScenario::Step(self.step));
        }
        if self.step > self.horizon {
            return Err(InvalidScenario::StepExceedsHorizon { step: self.step, horizon: self.horizon });
        }
        if self.record_stride == 0 {
            return Err(InvalidScenario::Stride);
        }
        let product = self.step * self.radius;
        if product > STEP_LIMIT {
            return Err(InvalidScenario::Unstable {
                step: self.step,
                radius: self.radius,
                product,
                suggested: round_down(STEP_LIMIT / self.radius),
            });
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn angles(&self) -> &[AngleLiteral] {
        &self.angles
    }

    pub fn profile(&self) -> &AngleProfile {
        self.laplacian.profile()
    }

    pub fn laplacian(&self) -> &WeightedLaplacian {
        &self.laplacian
    }

    pub fn spectral_radius(&self) -> f64 {
        self.radius
    }

    pub fn initial(&self) -> &[[f64; 2]] {
        &self.initial
    }

    /// Initial positions stacked as `(x₁, y₁, x₂, y₂, …)`.
    pub fn initial_state(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.initial.len(), self.initial.iter().flatten().copied())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn record_stride(&self) -> usize {
        self.record_stride
    }

    /// Number of RK4 steps needed to reach the horizon.
    pub fn step_count(&self) -> usize {
        ((self.horizon / self.step) - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("state became non-finite")]
pub struct NonFiniteState;

/// Reusable RK4 workspace for `ṗ = −L p`.
pub struct Rk4<'a> {
    l: &'a DMatrix<f64>,
    k: [DVector<f64>; 4],
    tmp: DVector<f64>,
}

impl<'a> Rk4<'a> {
    pub fn new(l: &'a DMatrix<f64>) -> Self {
        let zero = DVector::zeros(l.nrows());
        Self {
            l,
            k: [zero.clone(), zero.clone(), zero.clone(), zero.clone()],
            tmp: zero,
        }
    }

    /// Advances `p` by one step of size `h` in place.
    pub fn step(&mut self, p: &mut DVector<f64>, h: f64) -> Result<(), NonFiniteState> {
        let [k1, k2, k3, k4] = &mut self.k;
        k1.gemv(-1.0, self.l, p, 0.0);
        self.tmp.copy_from(p);
        self.tmp.axpy(0.5 * h, k1, 1.0);
        k2.gemv(-1.0, self.l, &self.tmp, 0.0);
        self.tmp.copy_from(p);
        self.tmp.axpy(0.5 * h, k2, 1.0);
        k3.gemv(-1.0, self.l, &self.tmp, 0.0);
        self.tmp.copy_from(p);
        self.tmp.axpy(h, k3, 1.0);
        k4.gemv(-1.0, self.l, &self.tmp, 0.0);
        for i in 0..p.len() {
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if p.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(NonFiniteState)
        }
    }
}

/// One RK4 step of `ṗ = −L p`.
pub fn step_rk4(l: &DMatrix<f64>, p: &DVector<f64>, h: f64) -> Result<DVector<f64>, NonFiniteState> {
    let mut next = p.clone();
    Rk4::new(l).step(&mut next, h)?;
    Ok(next)
}

/// Largest distance between any two agents; infinite for non-finite states.
pub fn disagreement(p: &[f64]) -> f64 {
    if p.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for (i, a) in p.chunks_exact(2).enumerate() {
        for b in p.chunks_exact(2).skip(i + 1) {
            worst = worst.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    worst
}

pub fn centroid(p: &[f64]) -> [f64; 2] {
    let n = (p.len() / 2).max(1) as f64;
    let (sx, sy) = p.chunks_exact(2).fold((0.0, 0.0), |(x, y), c| (x + c[0], y + c[1]));
    [sx / n, sy / n]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// Disagreement fell below the convergence tolerance.
    Converged { point: [f64; 2], time: f64 },
    /// Disagreement grew past the divergence threshold or overflowed.
    Diverged { time: f64 },
    /// Disagreement stayed essentially constant over the trailing window.
    Stalled,
    HorizonReached,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Converged { point, time } => {
                write!(f, "Converged at t = {time:.6} to ({:.6}, {:.6})", point[0], point[1])
            }
            Self::Diverged { time } => write!(f, "Diverged at t = {time:.6}"),
            Self::Stalled => f.write_str("Stalled"),
            Self::HorizonReached => f.write_str("HorizonReached"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeCriteria {
    /// Converged once disagreement is at most this.
    pub convergence_tol: f64,
    /// Diverged once disagreement reaches this multiple of its initial value.
    pub divergence_factor: f64,
    /// Trailing fraction of the horizon inspected for stalling.
    pub stall_window: f64,
    /// Relative spread of disagreement inside the window that counts as flat.
    pub stall_tol: f64,
}

impl Default for OutcomeCriteria {
    fn default() -> Self {
        Self {
            convergence_tol: 1e-6,
            divergence_factor: 1e6,
            stall_window: 0.1,
            stall_tol: 1e-3,
        }
    }
}

impl OutcomeCriteria {
    fn terminal(&self, d: f64, d0: f64) -> Option<bool> {
        if d <= self.convergence_tol {
            Some(true)
        } else if !d.is_finite() || d >= self.divergence_factor * d0 {
            Some(false)
        } else {
            None
        }
    }

    /// Classifies a sampled disagreement series. `states[k]` is the stacked
    /// state at `times[k]`.
    pub fn detect(&self, times: &[f64], disagreement: &[f64], states: &[DVector<f64>]) -> Outcome {
        let Some(&d0) = disagreement.first() else {
            return Outcome::HorizonReached;
        };
        for (k, &d) in disagreement.iter().enumerate() {
            match self.terminal(d, d0) {
                Some(true) => {
                    return Outcome::Converged {
                        point: centroid(states[k].as_slice()),
                        time: times[k],
                    }
                }
                Some(false) => return Outcome::Diverged { time: times[k] },
                None => {}
            }
        }
        let (t_first, t_last) = (times[0], times[times.len() - 1]);
        let start = t_last - self.stall_window * (t_last - t_first);
        let window: Vec<f64> = times
            .iter()
            .zip(disagreement)
            .filter(|(t, _)| **t >= start)
            .map(|(_, d)| *d)
            .collect();
        if window.len() >= 2 && t_last > t_first {
            let hi = window.iter().copied().fold(f64::MIN, f64::max);
            let lo = window.iter().copied().fold(f64::MAX, f64::min);
            if hi - lo <= self.stall_tol * hi {
                return Outcome::Stalled;
            }
        }
        Outcome::HorizonReached
    }
}

/// Sampled trajectory. Sample `k` is taken after `k · stride` steps, plus a
/// final sample at the last step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub disagreement: Vec<f64>,
    pub outcome: Outcome,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("a trajectory holds at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("a trajectory holds at least the initial time")
    }

    pub fn agents(&self) -> usize {
        self.final_state().len() / 2
    }
}

pub fn simulate(scenario: &Scenario) -> Trajectory {
    simulate_with(scenario, &OutcomeCriteria::default())
}

/// Integrates until the horizon, stopping early once the outcome is
/// Converged or Diverged.
pub fn simulate_with(scenario: &Scenario, criteria: &OutcomeCriteria) -> Trajectory {
    let h = scenario.step();
    let stride = scenario.record_stride();
    let steps = scenario.step_count();
    let mut p = scenario.initial_state();
    let d0 = disagreement(p.as_slice());
    let mut times = vec![0.0];
    let mut disagreements = vec![d0];
    let mut states = vec![p.clone()];
    let mut rk4 = Rk4::new(scenario.laplacian().matrix());
    let mut stopped = criteria.terminal(d0, d0).is_some();
    let mut overflow = None;
    let mut k = 0;
    while !stopped && k < steps {
        k += 1;
        let t = k as f64 * h;
        if rk4.step(&mut p, h).is_err() {
            overflow = Some(t);
            break;
        }
        if k % stride == 0 || k == steps {
            let d = disagreement(p.as_slice());
            times.push(t);
            disagreements.push(d);
            states.push(p.clone());
            stopped = criteria.terminal(d, d0).is_some();
        }
    }
    let outcome = match overflow {
        Some(time) => Outcome::Diverged { time },
        None => criteria.detect(&times, &disagreements, &states),
    };
    Trajectory {
        times,
        states,
        disagreement: disagreements,
        outcome,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn two_agents(theta: [f64; 2], initial: Vec<[f64; 2]>) -> Scenario {
        Scenario::from_radians("t", Graph::path(2).unwrap(), &theta, Some(initial)).unwrap()
    }

    #[test]
    fn single_step_matches_taylor_polynomial() {
        // for ṗ = −L p one RK4 step is the degree-4 Taylor polynomial of e^{−hL}
        let s = two_agents([FRAC_PI_4, -FRAC_PI_2], vec![[1.0, 2.0], [-3.0, 0.5]]);
        let l = s.laplacian().matrix();
        let p0 = s.initial_state();
        let h = 0.1;
        let mut expected = p0.clone();
        let mut term = p0.clone();
        for k in 1..=4 {
            term = -(l * &term) * (h / k as f64);
            expected += &term;
        }
        let got = step_rk4(l, &p0, h).unwrap();
        assert!((got - expected).amax() < 1e-14);
    }

    #[test]
    fn step_examples() {
        let edgeless = Graph::new_undirected(3, &[]).unwrap();
        let lap = WeightedLaplacian::build(&edgeless, &AngleProfile::zeros(3)).unwrap();
        let p = DVector::from_vec(vec![1.0, -2.0, 3.5, 0.0, 7.0, 1e3]);
        assert_eq!(step_rk4(lap.matrix(), &p, 0.7).unwrap(), p);

        let s = two_agents([0.0, 0.0], vec![[0.0, 0.0], [2.0, 0.0]]);
        let next = step_rk4(s.laplacian().matrix(), &s.initial_state(), 0.1).unwrap();
        assert_eq!(next[0] + next[2], 2.0);

        let huge = DVector::from_vec(vec![f64::MAX, 0.0, -f64::MAX, 0.0]);
        assert_eq!(step_rk4(s.laplacian().matrix(), &huge, 0.1), Err(NonFiniteState));
    }

    #[test]
    fn zero_initial_disagreement_converges_immediately() {
        let s = two_agents([0.0, 0.0], vec![[1.0, 1.0], [1.0, 1.0]]);
        let traj = simulate(&s);
        assert_eq!(traj.outcome, Outcome::Converged { point: [1.0, 1.0], time: 0.0 });
        assert_eq!(traj.times, vec![0.0]);
    }

    #[test]
    fn aligned_pair_converges_to_midpoint() {
        let s = two_agents([0.0, 0.0], vec![[0.0, 0.0], [2.0, 0.0]]);
        let traj = simulate(&s);
        match traj.outcome {
            Outcome::Converged { point, time } => {
                assert!((point[0] - 1.0).abs() < 1e-6 && point[1].abs() < 1e-12);
                // disagreement 2·e^{−2t} reaches 1e-6 at t ≈ 7.25
                assert!((time - 0.5 * (2e6f64).ln()).abs() < 0.02, "{time}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn parallel_drift_stalls() {
        let s = two_agents([FRAC_PI_2, -FRAC_PI_2], vec![[0.0, 0.0], [1.0, 0.0]])
            .with_horizon(20.0)
            .unwrap();
        let traj = simulate(&s);
        assert_eq!(traj.outcome, Outcome::Stalled);
        assert!(traj.disagreement.iter().all(|d| (d - 1.0).abs() < 1e-12));
    }

    #[test]
    fn half_turn_diverges() {
        let s = two_agents([PI, PI], vec![[0.0, 0.0], [1.0, 0.0]]);
        let traj = simulate(&s);
        match traj.outcome {
            // disagreement e^{2t} hits 1e6 at t ≈ 6.91
            Outcome::Diverged { time } => assert!((time - 0.5 * 1e6f64.ln()).abs() < 0.02, "{time}"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn sampling_layout() {
        let s = two_agents([FRAC_PI_2, -FRAC_PI_2], vec![[0.0, 0.0], [1.0, 0.0]])
            .with_horizon(0.105)
            .unwrap();
        assert_eq!(s.step_count(), 105);
        let traj = simulate(&s);
        assert_eq!(traj.times.len(), 12);
        assert!((traj.times[1] - 0.01).abs() < 1e-15);
        assert!((traj.final_time() - 0.105).abs() < 1e-12);
        assert_eq!(traj.outcome, Outcome::Stalled);
    }

    #[test]
    fn validation() {
        let g = Graph::path(2).unwrap();
        assert!(matches!(
            Scenario::from_radians("x", g.clone(), &[0.0], None),
            Err(InvalidScenario::AngleCount { graph: 2, angles: 1 })
        ));
        assert!(matches!(
            Scenario::from_radians("x", g.clone(), &[0.0, 0.0], Some(vec![[0.0, 0.0]])),
            Err(InvalidScenario::InitialCount { n: 2, got: 1 })
        ));
        assert!(matches!(
            Scenario::from_radians("x", g.clone(), &[0.0, 0.0], Some(vec![[0.0, 0.0], [f64::NAN, 0.0]])),
            Err(InvalidScenario::NonFiniteInitial { agent: 2 })
        ));
        let s = Scenario::from_radians("x", g, &[0.0, 0.0], None).unwrap();
        assert!(matches!(s.clone().with_horizon(-1.0), Err(InvalidScenario::Horizon(_))));
        assert!(matches!(s.clone().with_step(0.0), Err(InvalidScenario::Step(_))));
        assert!(matches!(s.clone().with_record_stride(0), Err(InvalidScenario::Stride)));
        assert!(matches!(
            s.clone().with_horizon(1e-4),
            Err(InvalidScenario::StepExceedsHorizon { .. })
        ));
        // ρ = 2, so h = 1.3 gives h·ρ = 2.6
        match s.with_horizon(10.0).unwrap().with_step(1.3) {
            Err(InvalidScenario::Unstable { suggested, .. }) => assert_eq!(suggested, 1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn default_initial_positions() {
        let p = default_initial(4);
        assert_eq!(p[0], [2.0, 0.0]);
        assert!((p[1][0]).abs() < 1e-15 && (p[1][1] - 2.0).abs() < 1e-15);
        assert!((p[2][0] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn stall_and_horizon_detection() {
        let c = OutcomeCriteria::default();
        let times: Vec<f64> = (0..=100).map(f64::from).collect();
        let states = vec![DVector::zeros(4); 101];
        assert_eq!(c.detect(&times, &[2.0; 101], &states), Outcome::Stalled);
        let decaying: Vec<f64> = times.iter().map(|t| 2.0 * (-0.01 * t).exp()).collect();
        assert_eq!(c.detect(&times, &decaying, &states), Outcome::HorizonReached);
        let mut settling = vec![1.0; 101];
        settling[100] = 1e-9;
        assert!(matches!(c.detect(&times, &settling, &states), Outcome::Converged { time, .. } if time == 100.0));
        let mut growing = vec![1.0; 101];
        growing[100] = 1e7;
        assert_eq!(c.detect(&times, &growing, &states), Outcome::Diverged { time: 100.0 });
        let mut blown = vec![1.0; 101];
        blown[40] = f64::INFINITY;
        assert_eq!(c.detect(&times, &blown, &states), Outcome::Diverged { time: 40.0 });
    }

    #[test]
    fn disagreement_examples() {
        assert_eq!(disagreement(&[0.0, 0.0, 3.0, 4.0, 1.0, 1.0]), 5.0);
        assert_eq!(disagreement(&[0.0, f64::NAN]), f64::INFINITY);
        assert_eq!(centroid(&[0.0, 0.0, 2.0, 4.0]), [1.0, 2.0]);
    }
}
