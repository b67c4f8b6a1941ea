//! Brownian (Smoluchowski) dynamics of an Exp-6 particle system at constant
//! volume and temperature, and the extraction of a coarse-grained stochastic
//! phase-field model from sampled trajectories.
//!
//! The crate is organised around the stages of that pipeline:
//!
//! * [`potential`]: the Exp-6 pair potential, its cutoff shift and tabulation.
//! * [`system`]: periodic box geometry, cell-list neighbour search, forces and
//!   per-particle energies.
//! * [`dynamics`]: Euler-Maruyama integration with reproducible noise streams,
//!   sampling and checkpointing.
//! * [`builder`]: FCC lattice construction in the two interface orientations,
//!   melt/quench preparation of liquids, two-phase assembly, and the
//!   coexistence-density line fit.
//! * [`observables`]: mollified profiles of the phase field and its drift
//!   terms, the grid diffusion kernel, radial distribution functions, and
//!   streaming accumulators.
//! * [`coarsegrain`]: square-root factorisation of the diffusion matrix,
//!   profile inversion, the double-well potential, mollified-step references,
//!   and the affine interface-scaling fit.
//! * [`config`]: the sectioned `key = value` run configuration format.

pub mod builder;
pub mod coarsegrain;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod observables;
pub mod potential;
pub mod snapshot;
pub mod stats;
pub mod system;

pub use error::{Error, Result};
pub use potential::{Exp6Params, PairPotential, PotentialTable, ShiftedExp6};
pub use system::{Configuration, ForceField, SimBox};
