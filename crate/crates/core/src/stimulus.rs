//! Timed spatial stimuli: a uniform background attractant, attractant bars
//! and simulated light. Light acts twice: it attenuates what sensors read
//! (see [`crate::agents::sense`]) and scales down the trail it covers.

use serde::{Deserialize, Serialize};

use crate::agents::ModelParams;
use crate::error::ConfigError;
use crate::lattice::{ArenaMask, Region, TrailLattice};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StimulusKind {
    Attractant,
    Light,
}

impl StimulusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StimulusKind::Attractant => "attractant",
            StimulusKind::Light => "light",
        }
    }
}

/// One stimulus, active on the half-open step interval `[start_step, end_step)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusEvent {
    pub kind: StimulusKind,
    pub region: Region,
    /// Attractant added per cell per step. Ignored for light.
    pub magnitude: Real,
    pub start_step: u64,
    pub end_step: u64,
}

impl StimulusEvent {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.start_step >= self.end_step {
            return Err(ConfigError::Invalid(format!(
                "stimulus window [{}, {}) is empty",
                self.start_step, self.end_step
            )));
        }
        if self.region.is_empty() {
            return Err(ConfigError::Invalid("stimulus region is empty".into()));
        }
        if !(self.magnitude >= 0.0) {
            return Err(ConfigError::OutOfRange {
                name: "stimulus_rate",
                value: self.magnitude as f64,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn is_active(&self, step: u64) -> bool {
        self.start_step <= step && step < self.end_step
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StimulusSchedule {
    pub events: Vec<StimulusEvent>,
    /// Attractant added to every habitable cell every step.
    pub background_rate: Real,
}

impl StimulusSchedule {
    pub fn active_events(&self, step: u64) -> impl Iterator<Item = &StimulusEvent> {
        self.events.iter().filter(move |e| e.is_active(step))
    }

    /// Last step at which any event is still active, plus one.
    pub fn stimulus_end(&self) -> Option<u64> {
        self.events.iter().map(|e| e.end_step).max()
    }

    pub fn stimulus_start(&self) -> Option<u64> {
        self.events.iter().map(|e| e.start_step).min()
    }
}

/// Habitable cells in the middle third of the columns, `[w/3, 2w/3)`.
pub fn middle_third_region(mask: &ArenaMask) -> Region {
    let w = mask.width();
    Region::columns(mask, w / 3..2 * w / 3)
}

/// Project the step's stimuli onto the trail and return the union of the
/// light regions active at `step` (empty when there is no light).
///
/// Background and attractant are added before light scales its footprint,
/// so light also removes part of that step's projected attractant.
pub fn apply_stimuli(
    trail: &mut TrailLattice,
    mask: &ArenaMask,
    schedule: &StimulusSchedule,
    params: &ModelParams,
    step: u64,
) -> Region {
    trail.add_to_habitable(mask, schedule.background_rate);
    let mut light = Region::empty(mask.width(), mask.height());
    for event in schedule.active_events(step) {
        match event.kind {
            StimulusKind::Attractant => trail.add_to_region(&event.region, event.magnitude),
            StimulusKind::Light => light.union_with(&event.region),
        }
    }
    if !light.is_empty() {
        // light_trail_factor is range-checked when params are validated.
        for &i in light.indices() {
            trail.scale_index(i, params.light_trail_factor);
        }
    }
    light
}
