//! Reports printed by each subcommand, as text or JSON.

use std::fmt::Write;
use std::io::IsTerminal;

use num_complex::Complex64;
use serde::Serialize;

use misalign_core::predictor::{consensus_point_with, ConsensusPrediction, PredictError};
use misalign_core::simulator::{centroid, Outcome, Scenario, Trajectory};
use misalign_core::spectrum::{gershgorin, Spectrum, SpectrumError, Stability, StabilityClass};
use misalign_core::verify::VerifyReport;

/// ANSI styling, off unless stdout is a terminal and
/// `MISALIGN_CONSENSUS_COLOR` is not `0`.
#[derive(Debug, Clone, Copy)]
pub struct Style {
    color: bool,
}

impl Style {
    pub fn detect() -> Self {
        let disabled = std::env::var("MISALIGN_CONSENSUS_COLOR").is_ok_and(|v| v.trim() == "0");
        Self {
            color: !disabled && std::io::stdout().is_terminal(),
        }
    }

    fn paint(&self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    fn good(&self, text: &str) -> String {
        self.paint("32", text)
    }

    fn bad(&self, text: &str) -> String {
        self.paint("31", text)
    }

    fn bold(&self, text: &str) -> String {
        self.paint("1", text)
    }

    fn verdict(&self, s: Stability, text: &str) -> String {
        match s {
            Stability::Consensus => self.good(text),
            Stability::Divergent => self.bad(text),
            _ => self.paint("33", text),
        }
    }
}

/// Six decimals, with values that round to zero printed unsigned.
fn fixed(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn complex(z: Complex64) -> String {
    let im = fixed(z.im.abs());
    if z.im < 0.0 && im.chars().any(|c| c.is_ascii_digit() && c != '0') {
        format!("{} - j{im}", fixed(z.re))
    } else {
        format!("{} + j{im}", fixed(z.re))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiskPair {
    /// One-based agent index.
    pub agent: usize,
    pub degree: f64,
    pub theta: f64,
    /// Center `m e^{jθ}`; the other disk is its conjugate.
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub point: [f64; 2],
    pub mixing: [[f64; 2]; 2],
    pub conserved_value: [f64; 2],
    pub centroid: [f64; 2],
    pub extrapolated: bool,
}

impl Prediction {
    fn new(p: &ConsensusPrediction, centroid: [f64; 2]) -> Self {
        let m = &p.mixing;
        Self {
            point: [p.point.x, p.point.y],
            mixing: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
            conserved_value: [p.conserved_value.x, p.conserved_value.y],
            centroid,
            extrapolated: p.extrapolated,
        }
    }
}

/// Prediction for a scenario given its verdict, or the reason it is refused.
pub fn predict(s: &Scenario, class: StabilityClass) -> Result<Prediction, PredictError> {
    let p0 = s.initial_state();
    let p = consensus_point_with(s.graph(), s.profile(), p0.as_slice(), Some(class))?;
    Ok(Prediction::new(&p, centroid(p0.as_slice())))
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub scenario: String,
    pub agents: usize,
    pub theta: Vec<String>,
    pub eigenvalues: Vec<Eigenvalue>,
    pub zero_count: usize,
    pub classification: StabilityClass,
    pub slowest_rate: Option<f64>,
    pub gershgorin: Vec<DiskPair>,
    pub prediction: Option<Prediction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction_unavailable: Option<String>,
}

impl AnalyzeReport {
    pub fn new(s: &Scenario, spectrum: &Spectrum) -> Result<Self, SpectrumError> {
        let class = spectrum.classification();
        let region = gershgorin(s.graph(), s.profile())?;
        let gershgorin = region
            .disks
            .iter()
            .fold(Vec::<DiskPair>::new(), |mut acc, d| {
                if acc.last().map_or(true, |p| p.agent != d.agent + 1) {
                    acc.push(DiskPair {
                        agent: d.agent + 1,
                        degree: d.radius,
                        theta: s.profile().angles()[d.agent],
                        center: [d.center.re, d.center.im],
                        radius: d.radius,
                    });
                }
                acc
            });
        let (prediction, prediction_unavailable) = match predict(s, class) {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Ok(Self {
            scenario: s.label().to_string(),
            agents: s.graph().n(),
            theta: s.angles().iter().map(|a| a.text().to_string()).collect(),
            eigenvalues: spectrum
                .eigenvalues()
                .iter()
                .map(|z| Eigenvalue { re: z.re, im: z.im })
                .collect(),
            zero_count: spectrum.zero_count(),
            classification: class,
            slowest_rate: spectrum.slowest_rate(),
            gershgorin,
            prediction,
            prediction_unavailable,
        })
    }

    pub fn render(&self, style: Style) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", style.bold(&format!("scenario {}", self.scenario)));
        let _ = writeln!(out, "agents: {}   θ: {}", self.agents, self.theta.join(", "));
        let _ = writeln!(out, "\neigenvalues of L_out (sorted by Re, then Im):");
        let _ = writeln!(out, "  {:>3}  {:>12}  {:>12}", "#", "Re", "Im");
        for (k, z) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "  {:>3}  {:>12}  {:>12}", k + 1, fixed(z.re), fixed(z.im));
        }
        let _ = writeln!(out, "zero eigenvalues: {}", self.zero_count);
        let class = &self.classification;
        let _ = writeln!(
            out,
            "classification: {}",
            style.verdict(class.stability, &class.to_string())
        );
        if let Some(rate) = self.slowest_rate {
            let _ = writeln!(out, "slowest rate |Re λ|: {}", fixed(rate));
        }
        let _ = writeln!(out, "\nGershgorin disks (centers m e^{{±jθ}}, radius m):");
        for d in &self.gershgorin {
            let c = Complex64::new(d.center[0], d.center[1]);
            let _ = writeln!(
                out,
                "  agent {:>2}: center {} and conjugate, radius {}",
                d.agent,
                complex(c),
                fixed(d.radius)
            );
        }
        let _ = writeln!(out);
        match (&self.prediction, &self.prediction_unavailable) {
            (Some(p), _) => out.push_str(&render_prediction(p)),
            (None, Some(why)) => {
                let _ = writeln!(out, "{why}");
            }
            (None, None) => {}
        }
        out
    }
}

pub fn render_prediction(p: &Prediction) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "consensus point: ({}, {})", fixed(p.point[0]), fixed(p.point[1]));
    let _ = writeln!(
        out,
        "mixing Y = (Σ D(θᵢ)ᵀ)⁻¹: [[{}, {}], [{}, {}]]",
        fixed(p.mixing[0][0]),
        fixed(p.mixing[0][1]),
        fixed(p.mixing[1][0]),
        fixed(p.mixing[1][1])
    );
    let _ = writeln!(
        out,
        "conserved value Σ D(θᵢ)ᵀ pᵢ(0): ({}, {})",
        fixed(p.conserved_value[0]),
        fixed(p.conserved_value[1])
    );
    let _ = writeln!(out, "centroid of initial positions: ({}, {})", fixed(p.centroid[0]), fixed(p.centroid[1]));
    if p.extrapolated {
        let _ = writeln!(
            out,
            "note: some cos θᵢ ≤ 0; the formula is applied because the spectrum says Consensus"
        );
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictReport {
    pub scenario: String,
    pub classification: StabilityClass,
    #[serde(flatten)]
    pub prediction: Prediction,
}

impl PredictReport {
    pub fn render(&self, style: Style) -> String {
        let mut out = style.bold(&format!("scenario {}", self.scenario));
        out.push('\n');
        let _ = writeln!(
            out,
            "classification: {}",
            style.verdict(self.classification.stability, &self.classification.to_string())
        );
        out.push_str(&render_prediction(&self.prediction));
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub scenario: String,
    pub horizon: f64,
    pub step: f64,
    pub outcome: Outcome,
    pub final_time: f64,
    pub samples: usize,
    pub initial_centroid: [f64; 2],
    pub final_positions: Vec<[f64; 2]>,
    pub files: Vec<String>,
}

impl SimulateReport {
    pub fn new(s: &Scenario, traj: &Trajectory) -> Self {
        Self {
            scenario: s.label().to_string(),
            horizon: s.horizon(),
            step: s.step(),
            outcome: traj.outcome,
            final_time: traj.final_time(),
            samples: traj.times.len(),
            initial_centroid: centroid(s.initial_state().as_slice()),
            final_positions: traj.final_state().as_slice().chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
            files: Vec::new(),
        }
    }

    pub fn render(&self, style: Style) -> String {
        let mut out = style.bold(&format!("scenario {}", self.scenario));
        out.push('\n');
        let _ = writeln!(out, "horizon {}, step {:e}, {} samples", self.horizon, self.step, self.samples);
        let text = self.outcome.to_string();
        let painted = match self.outcome {
            Outcome::Converged { .. } => style.good(&text),
            Outcome::Diverged { .. } => style.bad(&text),
            _ => style.paint("33", &text),
        };
        let _ = writeln!(out, "outcome: {painted}");
        let _ = writeln!(
            out,
            "centroid of initial positions: ({}, {})",
            fixed(self.initial_centroid[0]),
            fixed(self.initial_centroid[1])
        );
        let _ = writeln!(out, "final positions at t = {}:", fixed(self.final_time));
        for (i, p) in self.final_positions.iter().enumerate() {
            let _ = writeln!(out, "  agent {:>2}: ({:.6e}, {:.6e})", i + 1, p[0], p[1]);
        }
        for f in &self.files {
            let _ = writeln!(out, "wrote {f}");
        }
        out
    }
}

pub fn render_verify(report: &VerifyReport, style: Style) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed {}", report.seed);
    for p in &report.properties {
        let status = if p.passed() { style.good("PASS") } else { style.bad("FAIL") };
        let _ = writeln!(
            out,
            "{status}  {:<24} {:>4} trials, {} failures",
            p.property.name(),
            p.trials,
            p.failures
        );
        if let Some(c) = &p.counterexample {
            let _ = writeln!(out, "      trial {}: {}", c.trial, c.detail);
            let _ = writeln!(out, "      counterexample scenario:");
            for line in c.scenario.lines() {
                let _ = writeln!(out, "        {line}");
            }
        }
    }
    let passed = report.properties.iter().filter(|p| p.passed()).count();
    let _ = writeln!(out, "{passed} of {} properties passed", report.properties.len());
    out
}
