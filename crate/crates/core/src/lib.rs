//! Pilot-wave (Bohmian) dynamics on periodic grids.
//!
//! The crate evolves wavefunctions with a split-step spectral propagator,
//! derives the guidance velocity and quantum potential from them,
//! integrates particle trajectories in guidance and Newton form, samples
//! `|Ψ|²`-distributed ensembles, and runs the many-body centre-of-mass
//! experiments built on a factorized wavefunction.

pub mod ensemble;
pub mod error;
pub mod interp;
pub mod manybody;
pub mod propagator;
pub mod quantum_potential;
pub mod spectral;
pub mod stats;
pub mod trajectories;
pub mod wavefield;

pub use error::{Error, Result};
pub use propagator::{evolve, step, EvolutionRecord, PotentialSpec, Propagator};
pub use quantum_potential::{compute_qfields, QFields};
pub use wavefield::{make_grid, Grid, PhysicalParams, ScalarField, Wavefunction};
