//! Parameter sweeps and continuity-paired eigenvalue trajectories.

use std::io::{self, Write};

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment;
use crate::eigen::{self, c_product, EigenError, EigenSystem};
use crate::model::LevelModel;
use crate::rigidity::phase_rigidity;

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("grid needs at least 2 steps, got {0}")]
    TooFewSteps(usize),
    #[error("grid bounds must be finite and distinct, got [{0}, {1}]")]
    BadBounds(f64, f64),
    #[error("eigensolver failed at a = {a}: {source}")]
    Solver { a: f64, source: EigenError },
    #[error("cannot pair systems of sizes {0} and {1}")]
    SizeMismatch(usize, usize),
}

/// Uniform grid `a_k = a_start + (a_end − a_start)·k/(steps − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub a_start: f64,
    pub a_end: f64,
    pub steps: usize,
}

impl ParameterGrid {
    pub fn new(a_start: f64, a_end: f64, steps: usize) -> Result<Self, SweepError> {
        let grid = Self { a_start, a_end, steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.steps < 2 {
            return Err(SweepError::TooFewSteps(self.steps));
        }
        if !self.a_start.is_finite() || !self.a_end.is_finite() || self.a_start == self.a_end {
            return Err(SweepError::BadBounds(self.a_start, self.a_end));
        }
        Ok(())
    }

    /// Exact at both ends; grids with `2·steps − 1` points contain every
    /// point of this grid bit for bit at even indices.
    pub fn value(&self, k: usize) -> f64 {
        let last = self.steps - 1;
        if k == last {
            return self.a_end;
        }
        self.a_start + (self.a_end - self.a_start) * (k as f64 / last as f64)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.value(k)).collect()
    }

    pub fn step(&self) -> f64 {
        (self.a_end - self.a_start).abs() / (self.steps - 1) as f64
    }

    /// Same interval with twice the resolution.
    pub fn refined(&self) -> Self {
        Self {
            steps: 2 * self.steps - 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub tol_resid: f64,
    pub tol_defect: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            tol_resid: eigen::DEFAULT_TOL_RESID,
            tol_defect: eigen::DEFAULT_TOL_DEFECT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub value: Complex64,
    pub vector: DVector<Complex64>,
    pub rigidity: Complex64,
    pub c_norm_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub grid: ParameterGrid,
    /// `states[i][k]`: tracked state `i` at grid point `k`.
    pub states: Vec<Vec<TrajectoryPoint>>,
    /// `assignment[k][i]`: index of state `i` in the sorted spectrum at `k`.
    pub assignment: Vec<Vec<usize>>,
    /// Sorted spectrum returned by the eigensolver at each grid point.
    pub spectra: Vec<Vec<Complex64>>,
}

impl TrajectorySet {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn values_at(&self, k: usize) -> Vec<Complex64> {
        self.states.iter().map(|s| s[k].value).collect()
    }
}

/// Permutation `π` with `next[π(i)]` continuing `prev[i]`: minimizes
/// `Σ_i |𝓔_i^prev − 𝓔_π(i)^next|²`, ties broken by the largest total
/// c-product overlap `Σ_i |Φ_iᵀ Φ_π(i)|`.
pub fn pair_eigenvalues(prev: &EigenSystem, next: &EigenSystem) -> Result<Vec<usize>, SweepError> {
    let n = prev.len();
    if next.len() != n || prev.vectors.len() != n || next.vectors.len() != n {
        return Err(SweepError::SizeMismatch(n, next.len()));
    }
    let cost: Vec<Vec<f64>> = prev
        .values
        .iter()
        .map(|p| next.values.iter().map(|q| (p - q).norm_sqr()).collect())
        .collect();
    let reward: Vec<Vec<f64>> = prev
        .vectors
        .iter()
        .map(|p| next.vectors.iter().map(|q| c_product(p, q).norm()).collect())
        .collect();
    let scale = cost.iter().flatten().fold(0.0f64, |m, &c| m.max(c));
    Ok(assignment::assign(&cost, &reward, 1e-12 * scale.max(1e-300)))
}

fn decompose(model: &LevelModel, a: f64, options: &SweepOptions) -> Result<EigenSystem, SweepError> {
    let h = model.hamiltonian(a);
    eigen::eig_general(&h, options.tol_resid)
        .and_then(|sys| eigen::c_normalize(&sys, options.tol_defect))
        .map_err(|source| SweepError::Solver { a, source })
}

/// Decomposes `H(a_k)` at every grid point (in parallel) and links the
/// spectra left to right with [`pair_eigenvalues`].
pub fn sweep(model: &LevelModel, grid: &ParameterGrid, options: &SweepOptions) -> Result<TrajectorySet, SweepError> {
    grid.validate()?;
    let systems: Vec<EigenSystem> = grid
        .values()
        .par_iter()
        .map(|&a| decompose(model, a, options))
        .collect::<Result<_, _>>()?;

    let n = model.len();
    let mut assignment_seq = Vec::with_capacity(grid.steps);
    let mut states: Vec<Vec<TrajectoryPoint>> = vec![Vec::with_capacity(grid.steps); n];
    let mut current: Vec<usize> = (0..n).collect();
    let mut prev_tracked: Option<EigenSystem> = None;
    for system in &systems {
        if let Some(prev) = &prev_tracked {
            current = pair_eigenvalues(prev, system)?;
        }
        let tracked = system.permuted(&current);
        for (i, state) in states.iter_mut().enumerate() {
            let vector = tracked.vectors[i].clone();
            let rigidity = phase_rigidity(&vector).expect("eigenvectors are nonzero");
            state.push(TrajectoryPoint {
                value: tracked.values[i],
                vector,
                rigidity,
                c_norm_ok: tracked.c_norms_ok[i],
            });
        }
        assignment_seq.push(current.clone());
        prev_tracked = Some(tracked);
    }

    Ok(TrajectorySet {
        grid: *grid,
        states,
        assignment: assignment_seq,
        spectra: systems.into_iter().map(|s| s.values).collect(),
    })
}

/// Median over grid points of the distance between neighbouring
/// eigenvalues (sorted by real part).
pub fn median_level_spacing(trajectories: &TrajectorySet) -> f64 {
    let mut spacings: Vec<f64> = trajectories
        .spectra
        .iter()
        .flat_map(|spec| spec.windows(2).map(|w| (w[1] - w[0]).norm()).collect::<Vec<_>>())
        .collect();
    if spacings.is_empty() {
        return 0.0;
    }
    spacings.sort_by(f64::total_cmp);
    let m = spacings.len();
    if m % 2 == 1 {
        spacings[m / 2]
    } else {
        0.5 * (spacings[m / 2 - 1] + spacings[m / 2])
    }
}

/// One row of the trajectory table.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRow {
    pub a: f64,
    pub state: usize,
    #[serde(rename = "Re_E")]
    pub re_e: f64,
    #[serde(rename = "Im_E")]
    pub im_e: f64,
    pub r_re: f64,
    pub r_im: f64,
    pub c_norm_ok: bool,
}

/// Rows in grid-major, state-minor order.
pub fn trajectory_rows(trajectories: &TrajectorySet) -> Vec<TrajectoryRow> {
    let mut rows = Vec::with_capacity(trajectories.grid.steps * trajectories.n_states());
    for k in 0..trajectories.grid.steps {
        let a = trajectories.grid.value(k);
        for (i, state) in trajectories.states.iter().enumerate() {
            let p = &state[k];
            rows.push(TrajectoryRow {
                a,
                state: i,
                re_e: p.value.re,
                im_e: p.value.im,
                r_re: p.rigidity.re,
                r_im: p.rigidity.im,
                c_norm_ok: p.c_norm_ok,
            });
        }
    }
    rows
}

/// Fixed 17-significant-digit formatting used for every float in tables.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub const CSV_HEADER: &str = "a,state,Re_E,Im_E,r_re,r_im,c_norm_ok";

pub fn write_csv<W: Write>(trajectories: &TrajectorySet, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in trajectory_rows(trajectories) {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_float(row.a),
            row.state,
            fmt_float(row.re_e),
            fmt_float(row.im_e),
            fmt_float(row.r_re),
            fmt_float(row.r_im),
            row.c_norm_ok
        )?;
    }
    Ok(())
}
