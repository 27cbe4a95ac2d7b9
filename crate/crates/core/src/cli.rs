//! Command-line front end: `sweep`, `eps` and `reproduce`.
//!
//! Every command computes all of its outputs in memory first and then writes
//! each file through a temporary file and a rename, so a failing run leaves
//! no partial output behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::ep::{default_gap_tol, find_eps_2x2, find_near_coalescence, EpCandidate, EpKind};
use crate::reproduce::{self, Figure, ReproduceError, SummaryRow};
use crate::rigidity::RigidityError;
use crate::sweep::{trajectory_rows, write_csv, ParameterGrid, SweepError, TrajectorySet};

#[derive(Debug, Parser)]
#[command(name = "resonance", version, about = "Eigenvalue trajectories, exceptional points and phase rigidity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace eigenvalue trajectories and average the phase rigidity.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Locate exceptional points along the sweep.
    Eps {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Regenerate the data behind fig1 (trajectories) or fig2 (rigidity summary).
    Reproduce {
        figure: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_end: Option<f64>,
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<(f64, f64)>,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("window lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("window upper bound: {e}"))?;
    Ok((lo, hi))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::TooFewSteps(_) | SweepError::BadBounds(..) => {
                CliError::Config(ConfigError::Field {
                    field: "sweep".into(),
                    message: e.to_string(),
                })
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<RigidityError> for CliError {
    fn from(e: RigidityError) -> Self {
        match e {
            RigidityError::InvalidWindow(..) => CliError::Config(ConfigError::Field {
                field: "window".into(),
                message: e.to_string(),
            }),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<ReproduceError> for CliError {
    fn from(e: ReproduceError) -> Self {
        match e {
            ReproduceError::Sweep(e) => e.into(),
            ReproduceError::Rigidity(e) => e.into(),
        }
    }
}

/// Files produced by one command, written together at the end.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    /// Text for stdout.
    pub report: String,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    pub fn files(&self) -> &[(String, Vec<u8>)] {
        &self.files
    }

    /// Writes every file atomically; on failure removes the ones already in place.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut written: Vec<PathBuf> = Vec::new();
        for (name, bytes) in &self.files {
            let target = dir.join(name);
            let result = tempfile::NamedTempFile::new_in(dir)
                .and_then(|mut tmp| {
                    tmp.write_all(bytes)?;
                    tmp.flush()?;
                    Ok(tmp)
                })
                .and_then(|tmp| tmp.persist(&target).map_err(|e| e.error));
            if let Err(source) = result {
                for path in &written {
                    let _ = fs::remove_file(path);
                }
                return Err(CliError::Io { path: target, source });
            }
            written.push(target);
        }
        Ok(written)
    }
}

fn load_config(path: &Path, common: &CommonArgs) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw = serde_json::from_str(&text).map_err(ConfigError::from)?;
    let mut config = RunConfig::from_raw(raw)?;
    apply_overrides(&mut config, common)?;
    Ok(config)
}

fn apply_overrides(config: &mut RunConfig, common: &CommonArgs) -> Result<(), CliError> {
    let grid = ParameterGrid {
        a_start: common.a_start.unwrap_or(config.grid.a_start),
        a_end: common.a_end.unwrap_or(config.grid.a_end),
        steps: common.steps.unwrap_or(config.grid.steps),
    };
    grid.validate().map_err(|e| {
        CliError::Config(ConfigError::Field {
            field: "sweep".into(),
            message: e.to_string(),
        })
    })?;
    config.grid = grid;
    if let Some((lo, hi)) = common.window {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(CliError::Config(ConfigError::Field {
                field: "window".into(),
                message: format!("need finite lo < hi, got [{lo}, {hi}]"),
            }));
        }
        config.window = (lo, hi);
    }
    Ok(())
}

fn trajectory_table(trajectories: &TrajectorySet, format: Format) -> (&'static str, Vec<u8>) {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(trajectories, &mut buf).expect("writing to memory");
            ("csv", buf)
        }
        Format::Json => {
            let mut buf = serde_json::to_vec_pretty(&trajectory_rows(trajectories)).expect("rows serialize");
            buf.push(b'\n');
            ("json", buf)
        }
    }
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut buf = serde_json::to_vec_pretty(value).expect("serializable");
    buf.push(b'\n');
    buf
}

pub fn cmd_sweep(config: &RunConfig, format: Format) -> Result<Outputs, CliError> {
    let result = reproduce::run(config)?;
    let mut out = Outputs::default();
    let (ext, table) = trajectory_table(&result.trajectories, format);
    out.add(format!("trajectories.{ext}"), table);
    let summary = result.rigidity.summary();
    out.add("rigidity.json", to_json(&summary));
    out.report = format!(
        "N = {}: {} grid points, {} in-window samples, R = {:.6}, 1-R = {:.6}\n",
        summary.n, config.grid.steps, summary.samples, summary.r, summary.one_minus_r
    );
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateRecord {
    #[serde(flatten)]
    pub candidate: EpCandidate,
    pub source: &'static str,
}

/// Result of `eps` before serialization.
#[derive(Debug, Clone)]
pub struct EpsResult {
    pub records: Vec<CandidateRecord>,
    /// For two-level models: closed-form EPs on the axis that the detector
    /// did not find within two grid steps.
    pub unmatched_closed_form: Vec<f64>,
}

pub fn find_all_eps(config: &RunConfig) -> Result<EpsResult, CliError> {
    let trajectories = crate::sweep::sweep(&config.model, &config.grid, &config.sweep_options())?;
    let gap_tol = config.tolerances.gap_tol.unwrap_or_else(|| default_gap_tol(&trajectories));
    let detected = find_near_coalescence(&trajectories, gap_tol, config.rigidity_tol());

    let mut unmatched = Vec::new();
    let mut records: Vec<CandidateRecord> = Vec::new();
    if config.model.len() == 2 {
        let closed = find_eps_2x2(&config.model, (0, 1), (config.grid.a_start, config.grid.a_end))
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        let reach = 2.0 * config.grid.step();
        for c in &closed {
            if c.kind == EpKind::Ep
                && !detected.iter().any(|d| d.kind == EpKind::Ep && (d.a_star - c.a_star).abs() <= reach)
            {
                unmatched.push(c.a_star);
            }
        }
        records.extend(closed.into_iter().map(|candidate| CandidateRecord {
            candidate,
            source: "closed_form",
        }));
    }
    records.extend(detected.into_iter().map(|candidate| CandidateRecord {
        candidate,
        source: "detector",
    }));
    Ok(EpsResult {
        records,
        unmatched_closed_form: unmatched,
    })
}

pub fn cmd_eps(config: &RunConfig) -> Result<Outputs, CliError> {
    let result = find_all_eps(config)?;
    let count = |kind: EpKind| result.records.iter().filter(|r| r.candidate.kind == kind).count();
    let mut out = Outputs::default();
    out.add("eps.json", to_json(&result.records));
    out.report = format!(
        "{} candidates (ep: {}, diabolic: {}, off_axis: {})\n",
        result.records.len(),
        count(EpKind::Ep),
        count(EpKind::Diabolic),
        count(EpKind::OffAxis)
    );
    for a in &result.unmatched_closed_form {
        out.report
            .push_str(&format!("warning: closed-form EP at a = {a} not resolved by the detector on this grid\n"));
    }
    Ok(out)
}

pub fn cmd_reproduce(figure: Figure, common: &CommonArgs) -> Result<Outputs, CliError> {
    let mut out = Outputs::default();
    let mut rows: Vec<SummaryRow> = Vec::new();
    for n in 3..=6 {
        let mut config = reproduce::config_for(n).expect("bundled config");
        apply_overrides(&mut config, common)?;
        let result = reproduce::run(&config)?;
        let (ext, table) = trajectory_table(&result.trajectories, common.format);
        out.add(format!("trajectories_n{n}.{ext}"), table);
        if figure == Figure::Fig2 {
            rows.push(reproduce::summary_row(n, &result.rigidity).expect("reference value for N"));
        }
    }
    match figure {
        Figure::Fig1 => out.report = "wrote trajectories for N = 3, 4, 5, 6\n".to_string(),
        Figure::Fig2 => {
            out.add("fig2_summary.csv", reproduce::summary_csv(&rows));
            out.add("fig2_summary.json", to_json(&rows));
            out.report = reproduce::summary_table(&rows);
        }
    }
    Ok(out)
}

/// Parses arguments, runs the command and writes its outputs.
pub fn run(cli: Cli) -> Result<Outputs, CliError> {
    let (outputs, dir) = match &cli.command {
        Command::Sweep { config, common } => {
            let config = load_config(config, common)?;
            (cmd_sweep(&config, common.format)?, &common.out)
        }
        Command::Eps { config, common } => {
            let config = load_config(config, common)?;
            (cmd_eps(&config)?, &common.out)
        }
        Command::Reproduce { figure, common } => {
            let figure: Figure = figure.parse().map_err(CliError::Usage)?;
            (cmd_reproduce(figure, common)?, &common.out)
        }
    };
    outputs.commit(dir)?;
    Ok(outputs)
}
