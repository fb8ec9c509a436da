//! Randomized property suite over generated graphs and angle profiles.
//!
//! Every trial draws from its own generator seeded by the suite seed, the
//! property and the trial number, so a failure replays from those three
//! values alone.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::Graph;
use crate::laplacian::{ones_even, ones_odd, WeightedLaplacian};
use crate::rotation::{AngleLiteral, AngleProfile};
use crate::scenarios::{self, ScenarioFile};
use crate::spectrum::{
    common_angle_spectrum, gershgorin, match_spectra, matrix_rank, qr, three_agent_exact,
    two_agent_exact,
};

pub const MAX_AGENTS: usize = 8;
const STRUCTURE_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-9;
const ZERO_ABS_TOL: f64 = 1e-8;
const RANK_TOL: f64 = 1e-9;
/// Profiles for the sign conditions keep `|cos θᵢ|` above this.
pub const COS_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    NullSpace,
    Rank,
    Gershgorin,
    PositiveCosines,
    NegativeCosines,
    RightAngle,
    CommonAngle,
    TwoAgentClosedForm,
    ThreeAgentClosedForm,
}

impl Property {
    pub const ALL: [Property; 9] = [
        Self::NullSpace,
        Self::Rank,
        Self::Gershgorin,
        Self::PositiveCosines,
        Self::NegativeCosines,
        Self::RightAngle,
        Self::CommonAngle,
        Self::TwoAgentClosedForm,
        Self::ThreeAgentClosedForm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::NullSpace => "null-space",
            Self::Rank => "rank",
            Self::Gershgorin => "gershgorin",
            Self::PositiveCosines => "positive-cosines",
            Self::NegativeCosines => "negative-cosines",
            Self::RightAngle => "right-angle",
            Self::CommonAngle => "common-angle",
            Self::TwoAgentClosedForm => "two-agent-closed-form",
            Self::ThreeAgentClosedForm => "three-agent-closed-form",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::NullSpace => "L·1ᵉ, L·1ᵒ and row sums vanish",
            Self::Rank => "rank is 2n−2 on connected graphs",
            Self::Gershgorin => "eigenvalues lie in the union of disks |z − m e^{±jθ}| ≤ m",
            Self::PositiveCosines => "all cos θ > 0: two zeros, the rest in the open right half-plane",
            Self::NegativeCosines => "all cos θ < 0: the rest in the open left half-plane",
            Self::RightAngle => "common θ = π/2: every eigenvalue on the imaginary axis",
            Self::CommonAngle => "common θ: the doubled scalar spectrum rotated by ±θ",
            Self::TwoAgentClosedForm => "two agents: {0, 0, e^{jθ₁} + e^{jθ₂}, conjugate}",
            Self::ThreeAgentClosedForm => "K₃ with θ₂ = θ₃: closed-form spectrum",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Deliberate defects used to show that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Replaces every `D(θᵢ)` by `−D(θᵢ)`.
    NegateRotation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
    pub fault: Fault,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 200,
            fault: Fault::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub detail: String,
    /// Scenario file reproducing the failing graph and angles.
    pub scenario: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub trials: usize,
    pub failures: usize,
    /// First failing trial, if any.
    pub counterexample: Option<Counterexample>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub properties: Vec<PropertyReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyReport::passed)
    }
}

/// Generator for one trial.
pub fn trial_rng(seed: u64, property: Property, trial: usize) -> ChaCha8Rng {
    let index = Property::ALL.iter().position(|&p| p == property).unwrap_or(0) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.set_word_pos(trial as u128 * 1024);
    rng
}

/// Random connected graph on `n` agents: a random spanning tree plus each
/// remaining pair with probability `density`.
pub fn random_connected_graph(rng: &mut impl Rng, n: usize, density: f64) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut edges: Vec<(usize, usize)> = (1..n)
        .map(|k| (order[rng.gen_range(0..k)], order[k]))
        .collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    Graph::new_undirected(n, &edges).expect("indices are in range and distinct")
}

fn random_graph(rng: &mut impl Rng) -> Graph {
    let n = rng.gen_range(2..=MAX_AGENTS);
    let density = rng.gen_range(0.0..1.0);
    random_connected_graph(rng, n, density)
}

fn uniform_angle(rng: &mut impl Rng) -> f64 {
    rng.gen_range(-PI..PI)
}

/// Angle with `cos θ > COS_MARGIN`.
fn acute_angle(rng: &mut impl Rng) -> f64 {
    let limit = COS_MARGIN.acos();
    rng.gen_range(-limit..limit)
}

/// Angle with `cos θ < −COS_MARGIN`.
fn obtuse_angle(rng: &mut impl Rng) -> f64 {
    let a = acute_angle(rng);
    if a >= 0.0 {
        PI - a
    } else {
        -PI - a
    }
}

fn profile_of(theta: Vec<f64>) -> AngleProfile {
    AngleProfile::new(theta).expect("generated angles are finite")
}

struct Suite {
    fault: Fault,
}

type Check = Result<(), String>;

impl Suite {
    fn matrix(&self, lap: &WeightedLaplacian) -> DMatrix<f64> {
        match self.fault {
            Fault::None => lap.matrix().clone(),
            Fault::NegateRotation => -lap.matrix(),
        }
    }

    fn spectrum(&self, lap: &WeightedLaplacian) -> Result<Vec<Complex64>, String> {
        qr::eigenvalues(&self.matrix(lap)).map_err(|e| e.to_string())
    }

    fn build(g: &Graph, profile: &AngleProfile) -> Result<WeightedLaplacian, String> {
        WeightedLaplacian::build(g, profile).map_err(|e| e.to_string())
    }

    fn null_space(&self, g: &Graph, profile: &AngleProfile) -> Check {
        let lap = Self::build(g, profile)?;
        let m = self.matrix(&lap);
        let n = g.n();
        let even = (&m * ones_even(n)).amax();
        let odd = (&m * ones_odd(n)).amax();
        let rows = m.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max);
        let worst = even.max(odd).max(rows);
        if worst <= STRUCTURE_TOL {
            Ok(())
        } else {
            Err(format!("|L·1ᵉ| = {even:e}, |L·1ᵒ| = {odd:e}, max row sum {rows:e}"))
        }
    }

    fn rank(&self, g: &Graph, profile: &AngleProfile) -> Check {
        let lap = Self::build(g, profile)?;
        let r = matrix_rank(&self.matrix(&lap), RANK_TOL);
        if r == 2 * g.n() - 2 {
            Ok(())
        } else {
            Err(format!("rank {r}, expected {}", 2 * g.n() - 2))
        }
    }

    fn gershgorin(&self, g: &Graph, profile: &AngleProfile) -> Check {
        let region = gershgorin(g, profile).map_err(|e| e.to_string())?;
        let values = self.spectrum(&Self::build(g, profile)?)?;
        match values.iter().find(|z| !region.contains(**z)) {
            None => Ok(()),
            Some(z) => Err(format!("eigenvalue {z} lies outside every disk")),
        }
    }

    fn sign_condition(&self, g: &Graph, profile: &AngleProfile, positive: bool) -> Check {
        let values = self.spectrum(&Self::build(g, profile)?)?;
        let zeros = values.iter().filter(|z| z.norm() <= ZERO_ABS_TOL).count();
        if positive && zeros != 2 {
            return Err(format!("{zeros} eigenvalues within {ZERO_ABS_TOL:e} of zero, expected 2"));
        }
        let mut rest: Vec<&Complex64> = values.iter().collect();
        rest.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        let wrong = rest[2..]
            .iter()
            .find(|z| if positive { z.re <= 0.0 } else { z.re >= 0.0 });
        match wrong {
            None => Ok(()),
            Some(z) => Err(format!("eigenvalue {z} on the wrong side of the imaginary axis")),
        }
    }

    fn right_angle(&self, g: &Graph) -> Check {
        let profile = AngleProfile::uniform(g.n(), FRAC_PI_2).map_err(|e| e.to_string())?;
        let values = self.spectrum(&Self::build(g, &profile)?)?;
        match values.iter().find(|z| z.re.abs() > ORACLE_TOL) {
            None => Ok(()),
            Some(z) => Err(format!("eigenvalue {z} off the imaginary axis")),
        }
    }

    fn against(&self, g: &Graph, profile: &AngleProfile, expected: &[Complex64]) -> Check {
        let values = self.spectrum(&Self::build(g, profile)?)?;
        let m = match_spectra(&values, expected).ok_or("spectrum sizes differ")?;
        if m.max_distance <= ORACLE_TOL {
            Ok(())
        } else {
            Err(format!("matched eigenvalues differ by up to {:e}", m.max_distance))
        }
    }

    fn trial(&self, property: Property, rng: &mut ChaCha8Rng) -> (Graph, AngleProfile, Check) {
        let (g, profile) = match property {
            Property::PositiveCosines | Property::NegativeCosines => {
                let g = random_graph(rng);
                let draw = if property == Property::PositiveCosines { acute_angle } else { obtuse_angle };
                let theta = (0..g.n()).map(|_| draw(rng)).collect();
                (g, profile_of(theta))
            }
            Property::RightAngle => {
                let g = random_graph(rng);
                let n = g.n();
                (g, profile_of(vec![FRAC_PI_2; n]))
            }
            Property::CommonAngle => {
                let g = random_graph(rng);
                let n = g.n();
                (g, profile_of(vec![uniform_angle(rng); n]))
            }
            Property::TwoAgentClosedForm => {
                let theta = vec![uniform_angle(rng), uniform_angle(rng)];
                (Graph::path(2).expect("two agents"), profile_of(theta))
            }
            Property::ThreeAgentClosedForm => {
                let (a, b) = (uniform_angle(rng), uniform_angle(rng));
                (Graph::complete(3).expect("three agents"), profile_of(vec![a, b, b]))
            }
            _ => {
                let g = random_graph(rng);
                let theta = (0..g.n()).map(|_| uniform_angle(rng)).collect();
                (g, profile_of(theta))
            }
        };
        let t = profile.angles();
        let check = match property {
            Property::NullSpace => self.null_space(&g, &profile),
            Property::Rank => self.rank(&g, &profile),
            Property::Gershgorin => self.gershgorin(&g, &profile),
            Property::PositiveCosines => self.sign_condition(&g, &profile, true),
            Property::NegativeCosines => self.sign_condition(&g, &profile, false),
            Property::RightAngle => self.right_angle(&g),
            Property::CommonAngle => self.against(&g, &profile, &common_angle_spectrum(&g, t[0])),
            Property::TwoAgentClosedForm => self.against(&g, &profile, &two_agent_exact(t[0], t[1])),
            Property::ThreeAgentClosedForm => self.against(&g, &profile, &three_agent_exact(t[0], t[1])),
        };
        (g, profile, check)
    }
}

/// Scenario file for a failing trial. Written from the graph and angles
/// directly so that it exists even when the eigensolver is what failed.
fn replay_file(property: Property, seed: u64, trial: usize, g: &Graph, profile: &AngleProfile) -> String {
    let file = ScenarioFile {
        format_version: scenarios::FORMAT_VERSION,
        name: format!("verify {property} seed {seed} trial {trial}"),
        n: g.n(),
        edges: g.edges().iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
        theta: profile
            .angles()
            .iter()
            .map(|&t| AngleLiteral::from_radians(t).map_or_else(|_| format!("{t:?}"), |a| a.text().to_string()))
            .collect(),
        initial: None,
        horizon: None,
        step: None,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("scenario files serialize");
    text.push('\n');
    text
}

pub fn run_property(config: &VerifyConfig, property: Property) -> PropertyReport {
    let suite = Suite { fault: config.fault };
    let mut failures = 0;
    let mut counterexample = None;
    for trial in 0..config.trials {
        let mut rng = trial_rng(config.seed, property, trial);
        let (g, profile, check) = suite.trial(property, &mut rng);
        if let Err(detail) = check {
            failures += 1;
            if counterexample.is_none() {
                counterexample = Some(Counterexample {
                    trial,
                    detail,
                    scenario: replay_file(property, config.seed, trial, &g, &profile),
                });
            }
        }
    }
    PropertyReport {
        property,
        trials: config.trials,
        failures,
        counterexample,
    }
}

pub fn run(config: &VerifyConfig) -> VerifyReport {
    VerifyReport {
        seed: config.seed,
        properties: Property::ALL.iter().map(|&p| run_property(config, p)).collect(),
    }
}
