//! Non-Hermitian Hamiltonians of open quantum systems: eigenvalue
//! trajectories over a control parameter, exceptional points and phase
//! rigidity.
//!
//! The pipeline is [`model`] → [`eigen`] → [`sweep`] → [`rigidity`] /
//! [`ep`], driven from JSON configs by [`config`] and the [`cli`] commands.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod cli;
pub mod config;
pub mod eigen;
pub mod ep;
pub mod model;
pub mod reproduce;
pub mod rigidity;
pub mod sweep;

pub use eigen::{c_normalize, eig2_closed_form, eig_general, EigenSystem};
pub use ep::{check_ep_relation, find_eps_2x2, find_near_coalescence, z_function, EpCandidate, EpKind};
pub use model::{build_effective_hamiltonian, build_genuine_hamiltonian, ChannelSpec, LevelModel, LevelSpec, Profile};
pub use rigidity::{average_rigidity, phase_rigidity, RigidityReport};
pub use sweep::{pair_eigenvalues, sweep, ParameterGrid, SweepOptions, TrajectorySet};
