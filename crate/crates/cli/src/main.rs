//! `blochid`: simulate, fit and discriminate dephasing qubit models.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blochid_core::discriminator::{
    discriminate_with, fit_model_with, identifiability_report, DiscriminationConfig, Identifiability, KnownAngles,
};
use blochid_core::experiment::{
    auto_grid, auto_horizon, import_trace, sample_trace, uniform_grid, write_csv, write_json, TraceFormat,
    AUTO_GRID_POINTS,
};
use blochid_core::model::{bloch_trajectory, trace};
use blochid_core::{Error, ExperimentGeometry, ModelKind, ModelParams};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const AFTER_HELP: &str = "Units: times in arbitrary time units, omega in rad/time, gamma in 1/time, \
angles in radians (degrees with --degrees).\n\
Models: m1z, m1x, m1y (Hamiltonian and dephasing along the same axis), \
m2 (sigma_x drive, sigma_z dephasing), m3 (sigma_y drive, sigma_z dephasing).";

#[derive(Parser)]
#[command(name = "blochid", version, about = "Dephasing qubit model simulation, fitting and discrimination", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Noiseless measurement trace p(t) as CSV `time,p`.
    #[command(after_help = AFTER_HELP)]
    Trace {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        geom: GeomArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Bloch vector trajectory as CSV `time,vx,vy,vz`.
    #[command(after_help = AFTER_HELP)]
    Bloch {
        #[command(flatten)]
        model: ModelArgs,
        /// Preparation angle theta_I [rad]
        #[arg(long, allow_negative_numbers = true)]
        theta_i: f64,
        /// Interpret angles as degrees
        #[arg(long)]
        degrees: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Shot-noise-limited measurement record (CSV or JSON).
    #[command(after_help = AFTER_HELP)]
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        geom: GeomArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Shots per time point
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        /// RNG seed
        #[arg(long, env = "BLOCHID_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fit one model to a recorded trace; prints a JSON report.
    #[command(after_help = AFTER_HELP)]
    Fit {
        /// Model to fit
        #[arg(long)]
        model: ModelKind,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        known: KnownArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fit every candidate and select a model by BIC; prints a JSON report.
    #[command(after_help = AFTER_HELP)]
    Discriminate {
        /// Comma-separated candidate models [default: all five]
        #[arg(long, value_delimiter = ',')]
        candidates: Vec<ModelKind>,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        known: KnownArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Which of omega, gamma a noiseless trace determines at this geometry.
    #[command(after_help = AFTER_HELP)]
    Identifiability {
        /// Model variant
        #[arg(long)]
        model: ModelKind,
        #[command(flatten)]
        geom: GeomArgs,
        /// Include the reason for each verdict
        #[arg(long)]
        explain: bool,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Model variant
    #[arg(long)]
    model: ModelKind,
    /// Rabi frequency omega [rad/time]
    #[arg(long, allow_negative_numbers = true)]
    omega: f64,
    /// Dephasing rate gamma [1/time], >= 0
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
}

#[derive(Args)]
struct GeomArgs {
    /// Preparation angle theta_I [rad]
    #[arg(long, allow_negative_numbers = true)]
    theta_i: f64,
    /// Measurement angle theta_M [rad]
    #[arg(long, allow_negative_numbers = true)]
    theta_m: f64,
    /// Interpret angles as degrees
    #[arg(long)]
    degrees: bool,
}

#[derive(Args)]
struct KnownArgs {
    /// Known preparation angle theta_I [rad]; fitted when omitted
    #[arg(long, allow_negative_numbers = true)]
    theta_i: Option<f64>,
    /// Known measurement angle theta_M [rad]; fitted when omitted
    #[arg(long, allow_negative_numbers = true)]
    theta_m: Option<f64>,
    /// Interpret angles as degrees
    #[arg(long)]
    degrees: bool,
    /// JSON configuration (candidates, fixed_geometry, starts, bic_margin, tolerances, ...)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Last delay [time]; default covers three decay or oscillation scales
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of uniformly spaced delays, including t = 0
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct InputArgs {
    /// Recorded trace (.csv or .json)
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
}

#[derive(Args)]
struct OutArgs {
    /// Write to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format; defaults to the --out extension, else CSV for data and JSON for reports
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn angle(x: f64, degrees: bool) -> f64 {
    if degrees {
        x.to_radians()
    } else {
        x
    }
}

impl GeomArgs {
    fn geometry(&self) -> CliResult<ExperimentGeometry> {
        Ok(ExperimentGeometry::new(
            angle(self.theta_i, self.degrees),
            angle(self.theta_m, self.degrees),
        )?)
    }
}

impl ModelArgs {
    fn params(&self) -> CliResult<ModelParams> {
        Ok(ModelParams::new(self.omega, self.gamma)?)
    }
}

impl GridArgs {
    fn times(&self, params: ModelParams) -> CliResult<Vec<f64>> {
        Ok(match (self.t_max, self.points) {
            (None, None) => auto_grid(params),
            (t_max, points) => uniform_grid(
                t_max.unwrap_or_else(|| auto_horizon(params)),
                points.unwrap_or(AUTO_GRID_POINTS),
            )?,
        })
    }
}

impl OutArgs {
    fn format(&self, default: Format) -> CliResult<Format> {
        if let Some(f) = self.format {
            return Ok(f);
        }
        match &self.out {
            Some(path) => Ok(match TraceFormat::from_path(path)? {
                TraceFormat::Csv => Format::Csv,
                TraceFormat::Json => Format::Json,
            }),
            None => Ok(default),
        }
    }

    fn emit(&self, bytes: &[u8]) -> CliResult<()> {
        match &self.out {
            Some(path) => fs::write(path, bytes)
                .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
            None => io::stdout()
                .write_all(bytes)
                .map_err(|e| Failure::Input(format!("cannot write to standard output: {e}"))),
        }
    }
}

fn load_config(path: Option<&Path>) -> CliResult<DiscriminationConfig> {
    match path {
        None => Ok(DiscriminationConfig::default()),
        Some(p) => {
            let text =
                fs::read_to_string(p).map_err(|e| Failure::Input(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Input(format!("invalid config {}: {e}", p.display())))
        }
    }
}

impl KnownArgs {
    fn resolve(&self, cfg: &DiscriminationConfig) -> KnownAngles {
        let base = cfg.fixed_geometry.unwrap_or_default();
        KnownAngles {
            theta_i: self.theta_i.map(|a| angle(a, self.degrees)).or(base.theta_i),
            theta_m: self.theta_m.map(|a| angle(a, self.degrees)).or(base.theta_m),
        }
    }
}

#[derive(Serialize)]
struct IdentifiabilityOut {
    omega: Identifiability,
    gamma: Identifiability,
    #[serde(skip_serializing_if = "Option::is_none")]
    reasons: Option<Reasons>,
}

#[derive(Serialize)]
struct Reasons {
    omega: String,
    gamma: String,
}

fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(value)?;
    s.push(b'\n');
    Ok(s)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Trace { model, geom, grid, out } => {
            let params = model.params()?;
            let g = geom.geometry()?;
            let times = grid.times(params)?;
            let rows: Vec<(f64, f64)> = times.iter().map(|&t| (t, trace(model.model, params, g, t))).collect();
            let bytes = match out.format(Format::Csv)? {
                Format::Csv => {
                    let mut s = String::from("time,p\n");
                    for (t, p) in rows {
                        writeln!(s, "{t},{p}").expect("writing to a String");
                    }
                    s.into_bytes()
                }
                Format::Json => json_bytes(
                    &rows
                        .iter()
                        .map(|&(t, p)| serde_json::json!({ "t": t, "p": p }))
                        .collect::<Vec<_>>(),
                )?,
            };
            out.emit(&bytes)
        }
        Command::Bloch {
            model,
            theta_i,
            degrees,
            grid,
            out,
        } => {
            let params = model.params()?;
            let theta_i = ExperimentGeometry::new(angle(theta_i, degrees), 0.0)?.theta_i();
            let times = grid.times(params)?;
            let states: Vec<_> = times
                .iter()
                .map(|&t| (t, bloch_trajectory(model.model, params, theta_i, t)))
                .collect();
            let bytes = match out.format(Format::Csv)? {
                Format::Csv => {
                    let mut s = String::from("time,vx,vy,vz\n");
                    for (t, v) in states {
                        writeln!(s, "{t},{},{},{}", v.vx, v.vy, v.vz).expect("writing to a String");
                    }
                    s.into_bytes()
                }
                Format::Json => json_bytes(
                    &states
                        .iter()
                        .map(|(t, v)| serde_json::json!({ "t": t, "vx": v.vx, "vy": v.vy, "vz": v.vz }))
                        .collect::<Vec<_>>(),
                )?,
            };
            out.emit(&bytes)
        }
        Command::Sample {
            model,
            geom,
            grid,
            shots,
            seed,
            out,
        } => {
            let params = model.params()?;
            let g = geom.geometry()?;
            let times = grid.times(params)?;
            let tr = sample_trace(model.model, params, g, &times, shots, seed)?;
            let mut buf = Vec::new();
            match out.format(Format::Csv)? {
                Format::Csv => write_csv(&tr, &mut buf)?,
                Format::Json => write_json(&tr, &mut buf)?,
            }
            out.emit(&buf)
        }
        Command::Fit {
            model,
            input,
            known,
            out,
        } => {
            let cfg = load_config(known.config.as_deref())?;
            let tr = import_trace(&input.input)?;
            let report = fit_model_with(model, &tr, known.resolve(&cfg), &cfg.fit)?;
            out.emit(&json_bytes(&report)?)?;
            if !report.converged {
                return Err(Failure::Numerical(format!("the {model} fit did not converge")));
            }
            Ok(())
        }
        Command::Discriminate {
            candidates,
            input,
            known,
            out,
        } => {
            let cfg = load_config(known.config.as_deref())?;
            let candidates = if candidates.is_empty() {
                cfg.candidates.clone()
            } else {
                candidates
            };
            let tr = import_trace(&input.input)?;
            let report = discriminate_with(&tr, &candidates, known.resolve(&cfg), &cfg.fit, cfg.bic_margin)?;
            out.emit(&json_bytes(&report)?)?;
            if !report.any_converged() {
                return Err(Failure::Numerical("no candidate fit converged".into()));
            }
            Ok(())
        }
        Command::Identifiability { model, geom, explain } => {
            let report = identifiability_report(model, geom.geometry()?);
            let value = IdentifiabilityOut {
                omega: report.omega.status,
                gamma: report.gamma.status,
                reasons: explain.then_some(Reasons {
                    omega: report.omega.reason,
                    gamma: report.gamma.reason,
                }),
            };
            let mut s = serde_json::to_string(&value)?;
            s.push('\n');
            io::stdout()
                .write_all(s.as_bytes())
                .map_err(|e| Failure::Input(format!("cannot write to standard output: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("{first} (see `blochid --help`)");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
