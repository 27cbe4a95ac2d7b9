//! Built-in reproduction of the N = 3..6 overlapping-resonance experiment.

use serde::Serialize;

use crate::config::{bundled, RunConfig};
use crate::rigidity::{average_rigidity, RigidityError, RigidityReport};
use crate::sweep::{fmt_float, sweep, SweepError, TrajectorySet};

/// Reference `1 − R` values for N = 3, 4, 5, 6.
pub const REFERENCE_ONE_MINUS_R: [(usize, f64); 4] = [(3, 0.119819), (4, 0.122872), (5, 0.164372), (6, 0.0634185)];

/// Relative deviation below which a reproduced value is reported as matching.
pub const MATCH_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
}

impl std::str::FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            other => Err(format!("unknown figure id {other:?}; expected fig1 or fig2")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReproduceError {
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
}

/// Bundled config for `n` states (3 ≤ n ≤ 6).
pub fn config_for(n: usize) -> Option<RunConfig> {
    bundled(&format!("fig1_n{n}"))
}

pub struct RunResult {
    pub n: usize,
    pub trajectories: TrajectorySet,
    pub rigidity: RigidityReport,
}

pub fn run(config: &RunConfig) -> Result<RunResult, ReproduceError> {
    let trajectories = sweep(&config.model, &config.grid, &config.sweep_options())?;
    let rigidity = average_rigidity(&trajectories, config.window)?;
    Ok(RunResult {
        n: config.model.len(),
        trajectories,
        rigidity,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "one_minus_R")]
    pub one_minus_r: f64,
    #[serde(rename = "reference_one_minus_R")]
    pub reference_one_minus_r: f64,
    pub relative_deviation: f64,
    pub within_25_percent: bool,
}

pub fn summary_row(n: usize, report: &RigidityReport) -> Option<SummaryRow> {
    let reference = REFERENCE_ONE_MINUS_R.iter().find(|(m, _)| *m == n)?.1;
    let relative_deviation = (report.one_minus_r - reference) / reference;
    Some(SummaryRow {
        n,
        r: report.averaged_r,
        one_minus_r: report.one_minus_r,
        reference_one_minus_r: reference,
        relative_deviation,
        within_25_percent: relative_deviation.abs() <= MATCH_FRACTION,
    })
}

pub const SUMMARY_HEADER: &str = "N,R,one_minus_R,reference_one_minus_R,relative_deviation,within_25_percent";

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.n,
            fmt_float(row.r),
            fmt_float(row.one_minus_r),
            fmt_float(row.reference_one_minus_r),
            fmt_float(row.relative_deviation),
            row.within_25_percent
        ));
    }
    out
}

/// Human-readable table for the terminal.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:>2}  {:>10}  {:>10}  {:>10}  {:>9}\n",
        "N", "R", "1-R", "ref. 1-R", "rel.dev"
    );
    for row in rows {
        out.push_str(&format!(
            "{:>2}  {:>10.6}  {:>10.6}  {:>10.7}  {:>+8.1}%\n",
            row.n,
            row.r,
            row.one_minus_r,
            row.reference_one_minus_r,
            100.0 * row.relative_deviation
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids() {
        assert_eq!("fig1".parse::<Figure>(), Ok(Figure::Fig1));
        assert_eq!("fig2".parse::<Figure>(), Ok(Figure::Fig2));
        assert!("fig3".parse::<Figure>().is_err());
    }

    #[test]
    fn reference_values() {
        let ns: Vec<usize> = REFERENCE_ONE_MINUS_R.iter().map(|(n, _)| *n).collect();
        assert_eq!(ns, vec![3, 4, 5, 6]);
        assert_eq!(REFERENCE_ONE_MINUS_R[0].1, 0.119819);
        assert_eq!(REFERENCE_ONE_MINUS_R[3].1, 0.0634185);
    }

    #[test]
    fn summary_row_deviation() {
        let report = RigidityReport {
            per_state: vec![],
            averaged_r: 1.0 - 0.06,
            one_minus_r: 0.06,
            window: (0.0, 2.0),
            samples: 1,
        };
        let row = summary_row(6, &report).unwrap();
        assert!((row.relative_deviation - (0.06 - 0.0634185) / 0.0634185).abs() < 1e-15);
        assert!(row.within_25_percent);
        assert!(summary_row(7, &report).is_none());
    }
}
