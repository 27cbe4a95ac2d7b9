//! Exceptional-point localization.
//!
//! For two levels with affine energies, `4Z²(a) = d(a)² + 4ω²` with
//! `d(a) = ε1(a) − ε2(a) = p + q·a`, so the zeros of `Z` are the closed-form
//! roots `a = (−p ± 2iω)/q`. Real roots are exceptional points on the sweep
//! axis, complex roots are off-axis EPs that show up as avoided crossings.
//! For larger models [`find_near_coalescence`] scans trajectories for dips
//! of both the eigenvalue gap and the phase rigidity.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::eigen::{eig2_closed_form_matrix, TwoLevel};
use crate::model::{LevelModel, ModelError};
use crate::rigidity::phase_rigidity;
use crate::sweep::{median_level_spacing, TrajectorySet};

pub const DEFAULT_RIGIDITY_TOL: f64 = 0.2;
/// Relative to the median level spacing.
pub const DEFAULT_GAP_FRACTION: f64 = 0.1;
/// Degeneracies whose rigidities all stay at or above this are diabolic.
pub const DIABOLIC_RIGIDITY: f64 = 0.9;

#[derive(Debug, Error, PartialEq)]
pub enum EpError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("zero vector passed to the EP relation check")]
    ZeroVector,
    #[error("parameter range [{0}, {1}] is not finite")]
    BadRange(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpKind {
    Ep,
    Diabolic,
    OffAxis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpCandidate {
    pub a_star: f64,
    /// Imaginary part of the parameter location; nonzero only for off-axis EPs.
    pub a_star_imag: f64,
    pub pair: (usize, usize),
    pub gap: f64,
    pub rigidity_min: f64,
    pub relation_residual: f64,
    pub kind: EpKind,
}

/// `Z(a)` of the two-level subsystem formed by levels `i` and `j`.
pub fn z_function(model: &LevelModel, i: usize, j: usize, a: f64) -> Result<Complex64, EpError> {
    let sub = model.subsystem(i, j)?;
    Ok(eig2_closed_form_matrix(&sub.hamiltonian(a)).z)
}

/// Closed-form eigenvectors of a 2×2 complex-symmetric matrix, unit
/// Hermitian norm, in the order of [`TwoLevel::values`].
pub fn two_level_vectors(h: &nalgebra::DMatrix<Complex64>, closed: &TwoLevel) -> [DVector<Complex64>; 2] {
    let (e1, e2, w) = (h[(0, 0)], h[(1, 1)], h[(0, 1)]);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let make = |lambda: Complex64| {
        let v = if w == zero {
            if (lambda - e1).norm() <= (lambda - e2).norm() {
                DVector::from_vec(vec![one, zero])
            } else {
                DVector::from_vec(vec![zero, one])
            }
        } else {
            let a = DVector::from_vec(vec![w, lambda - e1]);
            let b = DVector::from_vec(vec![lambda - e2, w]);
            if a.norm() >= b.norm() {
                a
            } else {
                b
            }
        };
        let n = v.norm();
        v / Complex64::new(n, 0.0)
    };
    [make(closed.values[0]), make(closed.values[1])]
}

/// `min_{s = ±1, θ} ‖φ1 − s·i·e^{iθ}·φ2‖` after scaling both vectors to
/// unit Hermitian norm. Zero iff `φ1 ∥ i·φ2`; `√2` for orthogonal vectors.
pub fn check_ep_relation(phi1: &DVector<Complex64>, phi2: &DVector<Complex64>) -> Result<f64, EpError> {
    let (n1, n2) = (phi1.norm(), phi2.norm());
    if !(n1 > 0.0) || !(n2 > 0.0) {
        return Err(EpError::ZeroVector);
    }
    let overlap = (phi2.dotc(phi1)).norm() / (n1 * n2);
    Ok((2.0 - 2.0 * overlap.min(1.0)).max(0.0).sqrt())
}

fn in_range(a: f64, range: (f64, f64)) -> bool {
    let (lo, hi) = if range.0 <= range.1 { range } else { (range.1, range.0) };
    a >= lo && a <= hi
}

fn two_level_candidate(sub: &LevelModel, pair: (usize, usize), a: Complex64, kind: EpKind) -> EpCandidate {
    let h = sub.hamiltonian(a.re);
    let closed = eig2_closed_form_matrix(&h);
    let [v1, v2] = two_level_vectors(&h, &closed);
    let r1 = phase_rigidity(&v1).map(|r| r.norm()).unwrap_or(0.0);
    let r2 = phase_rigidity(&v2).map(|r| r.norm()).unwrap_or(0.0);
    EpCandidate {
        a_star: a.re,
        a_star_imag: a.im,
        pair,
        gap: (closed.values[0] - closed.values[1]).norm(),
        rigidity_min: r1.min(r2),
        relation_residual: check_ep_relation(&v1, &v2).unwrap_or(f64::NAN),
        kind,
    }
}

/// All zeros of `Z(a)` for levels `pair` whose real part lies in `a_range`.
///
/// Real roots are `Ep` (or `Diabolic` when the pair is uncoupled), complex
/// roots are reported as `OffAxis` with their imaginary part in
/// `a_star_imag`. Sorted by `a_star`.
pub fn find_eps_2x2(model: &LevelModel, pair: (usize, usize), a_range: (f64, f64)) -> Result<Vec<EpCandidate>, EpError> {
    if !a_range.0.is_finite() || !a_range.1.is_finite() {
        return Err(EpError::BadRange(a_range.0, a_range.1));
    }
    let sub = model.subsystem(pair.0, pair.1)?;
    let (l1, l2) = (sub.levels()[0], sub.levels()[1]);
    let omega = sub.coupling()[(0, 1)];
    let p = Complex64::new(l1.alpha - l2.alpha, l1.half_gamma - l2.half_gamma);
    let q = l1.beta - l2.beta;
    if q == 0.0 {
        // Z is a-independent: either never zero or zero everywhere
        return Ok(Vec::new());
    }

    let mut out = Vec::new();
    if omega == Complex64::new(0.0, 0.0) {
        let root = -p / q;
        if root.im == 0.0 && in_range(root.re, a_range) {
            out.push(two_level_candidate(&sub, pair, root, EpKind::Diabolic));
        }
        return Ok(out);
    }

    let two_i_omega = Complex64::new(0.0, 2.0) * omega;
    for root in [(-p + two_i_omega) / q, (-p - two_i_omega) / q] {
        if !in_range(root.re, a_range) {
            continue;
        }
        let on_axis = root.im.abs() <= 1e-12 * (1.0 + root.re.abs());
        if on_axis {
            out.push(two_level_candidate(&sub, pair, Complex64::new(root.re, 0.0), EpKind::Ep));
        } else {
            out.push(two_level_candidate(&sub, pair, root, EpKind::OffAxis));
        }
    }
    out.sort_by(|a, b| a.a_star.total_cmp(&b.a_star));
    Ok(out)
}

/// `gap_tol` used when none is configured: a fraction of the median spacing.
pub fn default_gap_tol(trajectories: &TrajectorySet) -> f64 {
    DEFAULT_GAP_FRACTION * median_level_spacing(trajectories)
}

/// Vertex of the parabola through three equally spaced samples, clamped to
/// the outer two abscissae.
fn parabolic_vertex(a: [f64; 3], y: [f64; 3]) -> f64 {
    let denom = y[0] - 2.0 * y[1] + y[2];
    if !(denom > 0.0) {
        return a[1];
    }
    let h = a[1] - a[0];
    let vertex = a[1] + 0.5 * h * (y[0] - y[2]) / denom;
    let (lo, hi) = if a[0] <= a[2] { (a[0], a[2]) } else { (a[2], a[0]) };
    vertex.clamp(lo, hi)
}

/// Every run of grid points where `|𝓔_i − 𝓔_j| < gap_tol` for a tracked pair
/// and `min(|r_i|, |r_j|)` drops below `rigidity_tol` somewhere in the run.
/// Ordered by pair, then `a_star`.
pub fn find_near_coalescence(trajectories: &TrajectorySet, gap_tol: f64, rigidity_tol: f64) -> Vec<EpCandidate> {
    let n = trajectories.n_states();
    let steps = trajectories.grid.steps;
    let grid = trajectories.grid.values();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (si, sj) = (&trajectories.states[i], &trajectories.states[j]);
            let gaps: Vec<f64> = (0..steps).map(|k| (si[k].value - sj[k].value).norm()).collect();
            let mut k = 0;
            while k < steps {
                if !(gaps[k] < gap_tol) {
                    k += 1;
                    continue;
                }
                let start = k;
                while k < steps && gaps[k] < gap_tol {
                    k += 1;
                }
                let run = start..k;
                let kmin = run.clone().min_by(|&x, &y| gaps[x].total_cmp(&gaps[y])).unwrap();
                let rigidity_min = run
                    .clone()
                    .map(|m| si[m].rigidity.norm().min(sj[m].rigidity.norm()))
                    .fold(f64::INFINITY, f64::min);
                if !(rigidity_min < rigidity_tol) {
                    continue;
                }
                let a_star = if kmin > 0 && kmin + 1 < steps {
                    parabolic_vertex(
                        [grid[kmin - 1], grid[kmin], grid[kmin + 1]],
                        [gaps[kmin - 1], gaps[kmin], gaps[kmin + 1]],
                    )
                } else {
                    grid[kmin]
                };
                let relation_residual = check_ep_relation(&si[kmin].vector, &sj[kmin].vector).unwrap_or(f64::NAN);
                out.push(EpCandidate {
                    a_star,
                    a_star_imag: 0.0,
                    pair: (i, j),
                    gap: gaps[kmin],
                    rigidity_min,
                    relation_residual,
                    kind: if rigidity_min >= DIABOLIC_RIGIDITY { EpKind::Diabolic } else { EpKind::Ep },
                });
            }
        }
    }
    out.sort_by(|a, b| a.pair.cmp(&b.pair).then(a.a_star.total_cmp(&b.a_star)));
    out
}
