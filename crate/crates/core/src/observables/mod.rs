//! Mollified profiles along the first coordinate axis and derived
//! observables: the potential-energy phase field, particle density, the
//! three drift terms, the grid diffusion kernel, and radial distribution
//! functions. Per-configuration evaluation is pure; results are combined
//! with streaming weighted accumulators.

mod fields;
mod grid;
mod kernel;
mod mollifier;
mod profile;
mod rdf;

pub use fields::{
    density_profile, density_values, drift_profiles, drift_values, phase_field_profile,
    phase_field_values, DriftSample, DriftTerms,
};
pub use grid::Grid;
pub use kernel::BandMatrix;
pub use mollifier::Mollifier;
pub use profile::Profile;
pub use rdf::{rdf, RdfCurve};
