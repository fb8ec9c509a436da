//! `misalign-consensus`: analyze, simulate, predict and verify misaligned
//! consensus scenarios.
//!
//! Exit codes: 0 ok, 1 property failure, 2 scenario error, 3 solver failure,
//! 4 output I/O error, 5 prediction unavailable.

mod csvio;
mod report;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use misalign_core::predictor::PredictError;
use misalign_core::scenarios::{self, ScenarioError};
use misalign_core::simulator::{simulate, InvalidScenario, Scenario};
use misalign_core::spectrum::{analyze, SpectrumError};
use misalign_core::verify::{self, Fault, Property, VerifyConfig};

use report::{AnalyzeReport, PredictReport, SimulateReport, Style};

#[derive(Debug, Parser)]
#[command(name = "misalign-consensus", version, about = "Consensus under misaligned agent frames")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues, stability verdict and Gershgorin disks of a scenario.
    Analyze(ScenarioArgs),
    /// Integrate a scenario and write its trajectory.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Directory for trajectory.csv, outcome.json and trajectory.svg.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Also write trajectory.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Predicted consensus point from the conserved quantity.
    Predict(ScenarioArgs),
    /// Run the randomized property suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Directory for counterexample scenario files.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<InjectedFault>,
    },
    /// Re-plot a stored trajectory.csv as SVG.
    Plot {
        /// Trajectory CSV written by `simulate`.
        csv: PathBuf,
        /// SVG file to write.
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[arg(long, default_value = "trajectory")]
        title: String,
    },
    /// List builtin scenarios.
    List,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InjectedFault {
    NegateRotation,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
struct Source {
    /// Builtin scenario key (see `list`).
    #[arg(long)]
    builtin: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    #[command(flatten)]
    source: Source,
    /// Override the simulated time span.
    #[arg(long)]
    horizon: Option<f64>,
    /// Override the integration step.
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Debug, Error)]
enum Failure {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", origin)]
    Scenario { origin: String, source: ScenarioError },
    #[error("eigensolver failed: {0}")]
    Solver(SpectrumError),
    #[error("cannot write {}: {message}", path.display())]
    Output { path: PathBuf, message: String },
    #[error("{0}")]
    Prediction(PredictError),
    #[error("{}: {source}", path.display())]
    Trajectory { path: PathBuf, source: csvio::CsvError },
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Read { .. } | Self::Trajectory { .. } => 2,
            Self::Scenario {
                source: ScenarioError::Invalid(InvalidScenario::Spectrum(_)),
                ..
            } => 3,
            Self::Scenario { .. } => 2,
            Self::Solver(_) => 3,
            Self::Output { .. } => 4,
            Self::Prediction(_) => 5,
        }
    }

    fn output(path: &Path, e: impl ToString) -> Self {
        Self::Output {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

fn load(args: &ScenarioArgs) -> Result<Scenario, Failure> {
    let (origin, loaded) = match (&args.source.builtin, &args.source.file) {
        (Some(key), _) => (format!("builtin {key}"), scenarios::builtin(key)),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|source| Failure::Read {
                path: path.clone(),
                source,
            })?;
            (path.display().to_string(), scenarios::parse(&text))
        }
        (None, None) => unreachable!("clap requires a scenario source"),
    };
    let invalid = |source: InvalidScenario| ScenarioError::Invalid(source);
    let mut s = loaded;
    if let Some(h) = args.horizon {
        s = s.and_then(|s| s.with_horizon(h).map_err(invalid));
    }
    if let Some(h) = args.step {
        s = s.and_then(|s| s.with_step(h).map_err(invalid));
    }
    s.map_err(|source| Failure::Scenario { origin, source })
}

fn emit<T: serde::Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
    } else {
        print!("{}", text());
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::output(path, e))
}

fn run(cli: Cli, style: Style) -> Result<u8, Failure> {
    match cli.command {
        Command::Analyze(args) => {
            let s = load(&args)?;
            let spectrum = analyze(s.graph(), s.profile()).map_err(Failure::Solver)?;
            let report = AnalyzeReport::new(&s, &spectrum).map_err(Failure::Solver)?;
            emit(cli.json, &report, || report.render(style));
            Ok(0)
        }
        Command::Predict(args) => {
            let s = load(&args)?;
            let class = analyze(s.graph(), s.profile()).map_err(Failure::Solver)?.classification();
            let prediction = report::predict(&s, class).map_err(Failure::Prediction)?;
            let report = PredictReport {
                scenario: s.label().to_string(),
                classification: class,
                prediction,
            };
            emit(cli.json, &report, || report.render(style));
            Ok(0)
        }
        Command::Simulate { scenario, output, svg } => {
            let s = load(&scenario)?;
            let traj = simulate(&s);
            let mut report = SimulateReport::new(&s, &traj);
            if let Some(dir) = output {
                fs::create_dir_all(&dir).map_err(|e| Failure::output(&dir, e))?;
                let states: Vec<&[f64]> = traj.states.iter().map(|p| p.as_slice()).collect();
                let csv_path = dir.join("trajectory.csv");
                let file = fs::File::create(&csv_path).map_err(|e| Failure::output(&csv_path, e))?;
                csvio::write(file, &traj.times, &states).map_err(|e| Failure::output(&csv_path, e))?;
                report.files.push(csv_path.display().to_string());
                if svg {
                    let path = dir.join("trajectory.svg");
                    let owned: Vec<Vec<f64>> = states.iter().map(|s| s.to_vec()).collect();
                    let title = format!("{}: {}", s.label(), traj.outcome);
                    write_file(&path, svg::render(&title, &owned).as_bytes())?;
                    report.files.push(path.display().to_string());
                }
                let path = dir.join("outcome.json");
                report.files.push(path.display().to_string());
                let mut body = serde_json::to_string_pretty(&report).expect("reports serialize");
                body.push('\n');
                write_file(&path, body.as_bytes())?;
            } else if svg {
                eprintln!("warning: --svg needs an output directory (-o); no plot written");
            }
            emit(cli.json, &report, || report.render(style));
            Ok(0)
        }
        Command::Verify {
            seed,
            trials,
            output,
            inject_fault,
        } => {
            let config = VerifyConfig {
                seed,
                trials,
                fault: match inject_fault {
                    Some(InjectedFault::NegateRotation) => Fault::NegateRotation,
                    None => Fault::None,
                },
            };
            let report = verify::run(&config);
            if let Some(dir) = output {
                let failing: Vec<_> = report
                    .properties
                    .iter()
                    .filter_map(|p| p.counterexample.as_ref().map(|c| (p.property, c)))
                    .collect();
                if !failing.is_empty() {
                    fs::create_dir_all(&dir).map_err(|e| Failure::output(&dir, e))?;
                }
                for (property, c) in failing {
                    let path = dir.join(counterexample_file(property));
                    write_file(&path, c.scenario.as_bytes())?;
                    eprintln!("wrote {}", path.display());
                }
            }
            emit(cli.json, &report, || report::render_verify(&report, style));
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Plot { csv, output, title } => {
            let file = fs::File::open(&csv).map_err(|source| Failure::Read {
                path: csv.clone(),
                source,
            })?;
            let samples = csvio::read(file).map_err(|source| Failure::Trajectory { path: csv, source })?;
            write_file(&output, svg::render(&title, &samples.states).as_bytes())?;
            if !cli.json {
                println!("wrote {}", output.display());
            }
            Ok(0)
        }
        Command::List => {
            let list = scenarios::builtin_list();
            if cli.json {
                let entries: Vec<_> = list
                    .iter()
                    .map(|(key, summary)| serde_json::json!({ "key": key, "summary": summary }))
                    .collect();
                println!("{}", serde_json::to_string_pretty(&entries).expect("list serializes"));
            } else {
                for (key, summary) in list {
                    println!("{key:<12} {summary}");
                }
            }
            Ok(0)
        }
    }
}

fn counterexample_file(property: Property) -> String {
    format!("counterexample-{}.json", property.name())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli, Style::detect()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
