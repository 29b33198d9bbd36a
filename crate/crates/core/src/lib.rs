//! A deterministic particle model of a slime-mould plasmodium confined to a
//! horizontal tube arena, with stimuli that reproduce lateral inhibition
//! (attractant) and lateral activation (simulated light), and a measurement
//! pipeline built on per-column population density.

pub mod agents;
pub mod cli;
pub mod config;
pub mod emit;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod measurement;
pub mod stimulus;

/// Scalar type for trail concentrations and agent coordinates.
#[cfg(not(feature = "single-precision"))]
pub type Real = f64;
#[cfg(feature = "single-precision")]
pub type Real = f32;

pub use agents::{Agent, ModelParams, World};
pub use error::{ConfigError, MeasurementError};
pub use experiment::{preset_la, preset_li, run, ExperimentConfig, RunRecord};
pub use lattice::{ArenaMask, Region, TrailLattice};
pub use measurement::{DensityProfile, RunSummary, SpaceTimeMatrix};
pub use stimulus::{StimulusEvent, StimulusKind, StimulusSchedule};
