//! Phase rigidity `r = (φᵀφ)/(φ†φ)` and its window average.
//!
//! `|r| = 1` for a vector with a global phase only (the Hermitian case) and
//! `r = 0` for a self-orthogonal vector, which is what an eigenvector turns
//! into at an exceptional point.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::eigen::c_product;
use crate::sweep::TrajectorySet;

#[derive(Debug, Error, PartialEq)]
pub enum RigidityError {
    #[error("phase rigidity of a zero vector is undefined")]
    ZeroVector,
    #[error("energy window [{0}, {1}] is empty")]
    InvalidWindow(f64, f64),
    #[error("no trajectory sample has Re E inside [{0}, {1}]")]
    EmptyWindow(f64, f64),
}

pub fn phase_rigidity(phi: &DVector<Complex64>) -> Result<Complex64, RigidityError> {
    let norm_sqr = phi.norm_squared();
    if !(norm_sqr > 0.0) {
        return Err(RigidityError::ZeroVector);
    }
    Ok(c_product(phi, phi) / norm_sqr)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidityReport {
    /// `per_state[i][k] = r_i(a_k)`.
    pub per_state: Vec<Vec<Complex64>>,
    pub averaged_r: f64,
    pub one_minus_r: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// JSON shape of a [`RigidityReport`].
#[derive(Debug, Clone, Serialize)]
pub struct RigiditySummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub window: [f64; 2],
    pub samples: usize,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "one_minus_R")]
    pub one_minus_r: f64,
}

impl RigidityReport {
    pub fn summary(&self) -> RigiditySummary {
        RigiditySummary {
            n: self.per_state.len(),
            window: [self.window.0, self.window.1],
            samples: self.samples,
            r: self.averaged_r,
            one_minus_r: self.one_minus_r,
        }
    }
}

/// Sum in a fixed binary-tree order.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Mean of `|r_i(a_k)|` over every (state, grid point) with
/// `E_min ≤ Re 𝓔_i(a_k) ≤ E_max`.
pub fn average_rigidity(trajectories: &TrajectorySet, window: (f64, f64)) -> Result<RigidityReport, RigidityError> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(RigidityError::InvalidWindow(lo, hi));
    }
    let per_state: Vec<Vec<Complex64>> = trajectories
        .states
        .iter()
        .map(|state| state.iter().map(|p| p.rigidity).collect())
        .collect();
    let included: Vec<f64> = trajectories
        .states
        .iter()
        .flat_map(|state| state.iter())
        .filter(|p| p.value.re >= lo && p.value.re <= hi)
        .map(|p| p.rigidity.norm())
        .collect();
    if included.is_empty() {
        return Err(RigidityError::EmptyWindow(lo, hi));
    }
    let averaged_r = pairwise_sum(&included) / included.len() as f64;
    Ok(RigidityReport {
        per_state,
        averaged_r,
        one_minus_r: 1.0 - averaged_r,
        window,
        samples: included.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_vector_is_rigid() {
        let r = phase_rigidity(&DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert_eq!(r, c(1.0, 0.0));
    }

    #[test]
    fn coalescence_vector_has_zero_rigidity() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = phase_rigidity(&DVector::from_vec(vec![c(s, 0.0), c(0.0, s)])).unwrap();
        assert!(r.norm() < 1e-16);
    }

    #[test]
    fn hand_evaluated_ratio() {
        let s = 1.0 / 5f64.sqrt();
        let r = phase_rigidity(&DVector::from_vec(vec![c(2.0 * s, 0.0), c(0.0, s)])).unwrap();
        assert!((r - c(0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert_eq!(phase_rigidity(&DVector::zeros(3)), Err(RigidityError::ZeroVector));
    }

    #[test]
    fn pairwise_sum_matches_naive_for_small_integers() {
        let xs: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499500.0);
    }

    proptest! {
        #[test]
        fn modulus_is_scale_and_phase_invariant(
            parts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..7),
            scale in 0.01f64..100.0,
            angle in -3.2f64..3.2,
        ) {
            let phi = DVector::from_vec(parts.iter().map(|&(a, b)| c(a, b)).collect());
            prop_assume!(phi.norm() > 1e-3);
            let k = Complex64::from_polar(scale, angle);
            let r1 = phase_rigidity(&phi).unwrap();
            let r2 = phase_rigidity(&(phi * k)).unwrap();
            prop_assert!((r1.norm() - r2.norm()).abs() < 1e-12);
            prop_assert!(r1.norm() <= 1.0 + 1e-12);
        }
    }
}
