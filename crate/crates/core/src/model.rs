//! Parameterized non-Hermitian Hamiltonians.
//!
//! A [`LevelModel`] holds N levels with complex energies
//! `ε_i(a) = (alpha_i + beta_i·a) + i·half_gamma_i` coupled through a complex
//! symmetric matrix `ω` with zero diagonal. The Hamiltonian at a parameter
//! value is `H(a) = diag(ε_i(a)) + ω`, which is complex symmetric (`H = Hᵀ`)
//! but not Hermitian whenever some `half_gamma_i != 0` or `ω` is complex.
//!
//! [`build_effective_hamiltonian`] gives the coupled-to-continuum form
//! `H_eff(E) = H_B + Σ_c [Δ_c(E) − (i/2)·w_c(E)] · v_c v_cᵀ` with one
//! separable channel term per decay channel.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("a model needs at least two levels, got {0}")]
    TooFewLevels(usize),
    #[error("coupling matrix is {rows}x{cols} but the model has {levels} levels")]
    DimensionMismatch {
        levels: usize,
        rows: usize,
        cols: usize,
    },
    #[error("coupling matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("coupling matrix has a nonzero diagonal entry at ({0}, {0})")]
    NonzeroDiagonal(usize),
    #[error("level {index}: {field} is not finite")]
    NonFinite { index: usize, field: &'static str },
    #[error("energy {energy} lies outside the tabulated profile domain [{lo}, {hi}]")]
    OutsideDomain { energy: f64, lo: f64, hi: f64 },
    #[error("channel {channel}: width profile is negative ({value}) at E = {energy}")]
    NegativeWidth {
        channel: usize,
        energy: f64,
        value: f64,
    },
    #[error("invalid profile table: {0}")]
    InvalidProfile(String),
}

/// One diagonal level: `e(a) = alpha + beta·a`, imaginary part `half_gamma`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LevelSpec {
    pub alpha: f64,
    pub beta: f64,
    /// `γ/2`; negative for decaying states.
    pub half_gamma: f64,
}

impl LevelSpec {
    pub fn new(alpha: f64, beta: f64, half_gamma: f64) -> Self {
        Self {
            alpha,
            beta,
            half_gamma,
        }
    }

    /// Real energy `e(a)`.
    pub fn energy(&self, a: f64) -> f64 {
        self.alpha + self.beta * a
    }

    /// Complex energy `ε(a) = e(a) + i·γ/2`.
    pub fn complex_energy(&self, a: f64) -> Complex64 {
        Complex64::new(self.energy(a), self.half_gamma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelModel {
    levels: Vec<LevelSpec>,
    coupling: DMatrix<Complex64>,
}

impl LevelModel {
    /// Validates dimensions, exact symmetry and the zero diagonal of `coupling`.
    pub fn new(levels: Vec<LevelSpec>, coupling: DMatrix<Complex64>) -> Result<Self, ModelError> {
        let n = levels.len();
        if n < 2 {
            return Err(ModelError::TooFewLevels(n));
        }
        if coupling.nrows() != n || coupling.ncols() != n {
            return Err(ModelError::DimensionMismatch {
                levels: n,
                rows: coupling.nrows(),
                cols: coupling.ncols(),
            });
        }
        for (index, level) in levels.iter().enumerate() {
            for (field, value) in [
                ("alpha", level.alpha),
                ("beta", level.beta),
                ("half_gamma", level.half_gamma),
            ] {
                if !value.is_finite() {
                    return Err(ModelError::NonFinite { index, field });
                }
            }
        }
        for i in 0..n {
            if coupling[(i, i)] != Complex64::new(0.0, 0.0) {
                return Err(ModelError::NonzeroDiagonal(i));
            }
            for j in (i + 1)..n {
                if coupling[(i, j)] != coupling[(j, i)] {
                    return Err(ModelError::NotSymmetric(i, j));
                }
            }
        }
        Ok(Self { levels, coupling })
    }

    /// All off-diagonal couplings equal to `omega`, diagonal zero.
    pub fn with_uniform_coupling(levels: Vec<LevelSpec>, omega: Complex64) -> Result<Self, ModelError> {
        let n = levels.len();
        let coupling = DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(0.0, 0.0) } else { omega });
        Self::new(levels, coupling)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[LevelSpec] {
        &self.levels
    }

    pub fn coupling(&self) -> &DMatrix<Complex64> {
        &self.coupling
    }

    /// `H(a)`: diagonal `ε_i(a)`, off-diagonal `ω_ij`.
    pub fn hamiltonian(&self, a: f64) -> DMatrix<Complex64> {
        let mut h = self.coupling.clone();
        for (i, level) in self.levels.iter().enumerate() {
            h[(i, i)] = level.complex_energy(a);
        }
        h
    }

    /// The two-level model formed by levels `i` and `j` and their mutual coupling.
    pub fn subsystem(&self, i: usize, j: usize) -> Result<LevelModel, ModelError> {
        let n = self.len();
        if i >= n || j >= n || i == j {
            return Err(ModelError::DimensionMismatch {
                levels: n,
                rows: i.max(j) + 1,
                cols: i.max(j) + 1,
            });
        }
        Self::with_uniform_coupling(vec![self.levels[i], self.levels[j]], self.coupling[(i, j)])
    }

    /// `Σ_i γ_i/2`, the a-independent imaginary part of the trace.
    pub fn width_sum(&self) -> f64 {
        self.levels.iter().map(|l| l.half_gamma).sum()
    }

    /// `[min γ_i/2, max γ_i/2]`.
    pub fn half_gamma_range(&self) -> (f64, f64) {
        self.levels.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
            (lo.min(l.half_gamma), hi.max(l.half_gamma))
        })
    }

    /// True when every width is zero and every coupling is real.
    pub fn is_hermitian(&self) -> bool {
        self.levels.iter().all(|l| l.half_gamma == 0.0) && self.coupling.iter().all(|w| w.im == 0.0)
    }
}

/// Free-function form of [`LevelModel::hamiltonian`].
pub fn build_genuine_hamiltonian(model: &LevelModel, a: f64) -> DMatrix<Complex64> {
    model.hamiltonian(a)
}

/// A real function of energy used for channel shifts and widths.
#[derive(Clone)]
pub enum Profile {
    Constant(f64),
    /// Piecewise-linear table; energies strictly increasing. Evaluation
    /// outside `[energies[0], energies[last]]` is a domain error.
    Tabulated { energies: Vec<f64>, values: Vec<f64> },
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Profile::Tabulated { energies, values } => f
                .debug_struct("Tabulated")
                .field("energies", energies)
                .field("values", values)
                .finish(),
            Profile::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl Profile {
    pub fn tabulated(energies: Vec<f64>, values: Vec<f64>) -> Result<Self, ModelError> {
        if energies.len() != values.len() {
            return Err(ModelError::InvalidProfile(format!(
                "{} energies but {} values",
                energies.len(),
                values.len()
            )));
        }
        if energies.is_empty() {
            return Err(ModelError::InvalidProfile("empty table".into()));
        }
        if energies.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ModelError::InvalidProfile("energies must be strictly increasing".into()));
        }
        Ok(Profile::Tabulated { energies, values })
    }

    pub fn eval(&self, energy: f64) -> Result<f64, ModelError> {
        match self {
            Profile::Constant(v) => Ok(*v),
            Profile::Function(f) => Ok(f(energy)),
            Profile::Tabulated { energies, values } => {
                let lo = energies[0];
                let hi = energies[energies.len() - 1];
                if !(energy >= lo && energy <= hi) {
                    return Err(ModelError::OutsideDomain { energy, lo, hi });
                }
                // first index with energies[idx] >= energy
                let idx = energies.partition_point(|&e| e < energy);
                if energies[idx] == energy {
                    return Ok(values[idx]);
                }
                let (e0, e1) = (energies[idx - 1], energies[idx]);
                let t = (energy - e0) / (e1 - e0);
                Ok(values[idx - 1] + t * (values[idx] - values[idx - 1]))
            }
        }
    }
}

/// One decay channel: coupling vector `v_c` plus the principal-value shift
/// `Δ_c(E)` and the width `w_c(E) ≥ 0`.
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    pub coupling_vector: DVector<Complex64>,
    pub shift_profile: Profile,
    pub width_profile: Profile,
}

/// `H_eff(E) = H_B + Σ_c [Δ_c(E) − (i/2)·w_c(E)] · v_c v_cᵀ`.
///
/// Channels whose complex prefactor is exactly zero contribute nothing, so a
/// model with vanishing shifts and widths returns `H_B` bit for bit.
pub fn build_effective_hamiltonian(
    h_b: &DMatrix<f64>,
    channels: &[ChannelSpec],
    energy: f64,
) -> Result<DMatrix<Complex64>, ModelError> {
    let n = h_b.nrows();
    if h_b.ncols() != n {
        return Err(ModelError::DimensionMismatch {
            levels: n,
            rows: h_b.nrows(),
            cols: h_b.ncols(),
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if h_b[(i, j)] != h_b[(j, i)] {
                return Err(ModelError::NotSymmetric(i, j));
            }
        }
    }
    let mut h = h_b.map(|x| Complex64::new(x, 0.0));
    for (c, channel) in channels.iter().enumerate() {
        let v = &channel.coupling_vector;
        if v.len() != n {
            return Err(ModelError::DimensionMismatch {
                levels: n,
                rows: v.len(),
                cols: 1,
            });
        }
        let shift = channel.shift_profile.eval(energy)?;
        let width = channel.width_profile.eval(energy)?;
        if width < 0.0 {
            return Err(ModelError::NegativeWidth {
                channel: c,
                energy,
                value: width,
            });
        }
        let factor = Complex64::new(shift, -0.5 * width);
        if factor == Complex64::new(0.0, 0.0) {
            continue;
        }
        for i in 0..n {
            for j in i..n {
                let term = factor * (v[i] * v[j]);
                h[(i, j)] += term;
                if i != j {
                    h[(j, i)] += term;
                }
            }
        }
    }
    Ok(h)
}

/// Level parameters from the six-state overlapping-resonance experiment:
/// `e1 = 1 − a/2, e2 = a, e3 = 1/2 + a, e4 = 2a, e5 = 2a, e6 = a + 1` with
/// `γ/2 = (−0.5, −0.1, −0.6335, −0.323, −0.31, −0.5)`.
pub fn fig1_levels() -> [LevelSpec; 6] {
    [
        LevelSpec::new(1.0, -0.5, -0.5),
        LevelSpec::new(0.0, 1.0, -0.1),
        LevelSpec::new(0.5, 1.0, -0.6335),
        LevelSpec::new(0.0, 2.0, -0.323),
        LevelSpec::new(0.0, 2.0, -0.31),
        LevelSpec::new(1.0, 1.0, -0.5),
    ]
}

/// Uniform off-diagonal coupling of the experiment.
pub const FIG1_OMEGA: f64 = 0.2;

/// The first `n` experiment levels (3 ≤ n ≤ 6 in the experiment; any 2 ≤ n ≤ 6 accepted).
pub fn fig1_model(n: usize) -> Result<LevelModel, ModelError> {
    let levels = fig1_levels();
    if n < 2 || n > levels.len() {
        return Err(ModelError::TooFewLevels(n));
    }
    LevelModel::with_uniform_coupling(levels[..n].to_vec(), Complex64::new(FIG1_OMEGA, 0.0))
}
