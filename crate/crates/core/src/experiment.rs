//! Experiment configuration, the lateral inhibition / activation presets,
//! and the deterministic run loop.

use serde::{Deserialize, Serialize};

use crate::agents::{Agent, ModelParams, World};
use crate::error::ConfigError;
use crate::lattice::{ArenaMask, Region, TrailLattice};
use crate::measurement::{sample_if_due, summarize, RunSummary, SpaceTimeMatrix, SummaryWindows};
use crate::stimulus::{middle_third_region, StimulusEvent, StimulusKind, StimulusSchedule};
use crate::Real;

/// Seed used by the presets unless overridden.
pub const DEFAULT_SEED: u64 = 20_131;

/// Pre-stimulus window over which the baseline uniformity is averaged.
pub const BASELINE_WINDOW: (u64, u64) = (500, 1000);
/// Steps after stimulus onset scanned for where density changes begin.
pub const ONSET_WINDOW: u64 = 500;
/// A profile counts as recovered at this multiple of the baseline CV.
pub const RECOVERY_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArenaConfig {
    pub width: usize,
    pub height: usize,
    pub border_rows: usize,
}

impl ArenaConfig {
    pub fn build(&self) -> Result<ArenaMask, ConfigError> {
        ArenaMask::tube(self.width, self.height, self.border_rows)
    }
}

/// Where a stimulus is projected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionSpec {
    /// Habitable cells in columns `[w/3, 2w/3)`.
    MiddleThird,
    /// Habitable cells in columns `[start, end)`.
    Columns { start: usize, end: usize },
}

impl RegionSpec {
    pub fn build(&self, mask: &ArenaMask) -> Region {
        match *self {
            RegionSpec::MiddleThird => middle_third_region(mask),
            RegionSpec::Columns { start, end } => Region::columns(mask, start..end),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub kind: StimulusKind,
    pub region: RegionSpec,
    /// Attractant per cell per step; unused for light.
    pub magnitude: Real,
    pub start_step: u64,
    pub end_step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub background_rate: Real,
    pub events: Vec<EventSpec>,
}

impl ScheduleSpec {
    pub fn build(&self, mask: &ArenaMask) -> StimulusSchedule {
        StimulusSchedule {
            background_rate: self.background_rate,
            events: self
                .events
                .iter()
                .map(|e| StimulusEvent {
                    kind: e.kind,
                    region: e.region.build(mask),
                    magnitude: e.magnitude,
                    start_step: e.start_step,
                    end_step: e.end_step,
                })
                .collect(),
        }
    }
}

/// Everything that determines a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub arena: ArenaConfig,
    pub population: usize,
    pub model: ModelParams,
    pub schedule: ScheduleSpec,
    pub total_steps: u64,
    pub sample_interval: u64,
    /// Steps between trail/agent snapshots; 0 disables them.
    pub snapshot_interval: u64,
    pub seed: u64,
}

/// Default attractant projected into every habitable cell per step.
pub const BACKGROUND_RATE: Real = 0.01;
/// Default attractant projected per stimulus cell per step.
pub const STIMULUS_RATE: Real = 0.1;

fn preset(kind: StimulusKind) -> ExperimentConfig {
    ExperimentConfig {
        arena: ArenaConfig {
            width: 300,
            height: 100,
            border_rows: 10,
        },
        population: 8000,
        model: ModelParams::default(),
        schedule: ScheduleSpec {
            background_rate: BACKGROUND_RATE,
            events: vec![EventSpec {
                kind,
                region: RegionSpec::MiddleThird,
                magnitude: STIMULUS_RATE,
                start_step: 1000,
                end_step: 4000,
            }],
        },
        total_steps: 20_000,
        sample_interval: 10,
        snapshot_interval: 0,
        seed: DEFAULT_SEED,
    }
}

/// Attractant bar over the middle third, steps `[1000, 4000)`.
pub fn preset_li() -> ExperimentConfig {
    preset(StimulusKind::Attractant)
}

/// As [`preset_li`] with simulated light in place of the attractant.
pub fn preset_la() -> ExperimentConfig {
    preset(StimulusKind::Light)
}

impl ExperimentConfig {
    /// Same protocol on a 60x30 arena with 400 agents for 2000 steps.
    pub fn reduced(mut self) -> Self {
        self.arena = ArenaConfig {
            width: 60,
            height: 30,
            border_rows: 3,
        };
        self.population = 400;
        self.total_steps = 2000;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn without_stimuli(mut self) -> Self {
        self.schedule.events.clear();
        self
    }
}

/// One invariant violated by a configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub code: &'static str,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.code, self.message)
    }
}

fn violation(code: &'static str, message: impl Into<String>) -> Violation {
    Violation {
        code,
        message: message.into(),
    }
}

/// Every invariant the configuration breaks; empty when it is runnable.
pub fn validate(config: &ExperimentConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    match config.arena.build() {
        Ok(mask) => {
            if config.population > mask.habitable_count() {
                out.push(violation(
                    "capacity",
                    format!(
                        "population {} exceeds habitable capacity {}",
                        config.population,
                        mask.habitable_count()
                    ),
                ));
            }
            for (i, e) in config.schedule.events.iter().enumerate() {
                if e.region.build(&mask).is_empty() {
                    out.push(violation(
                        "stimulus_region",
                        format!("stimulus {i} covers no habitable cell"),
                    ));
                }
            }
        }
        Err(e) => out.push(violation("arena", e.to_string())),
    }
    for e in config.model.violations() {
        let code = match e {
            ConfigError::OutOfRange { .. } => "range",
            _ => "model",
        };
        out.push(violation(code, e.to_string()));
    }
    if !(config.schedule.background_rate >= 0.0) {
        out.push(violation(
            "range",
            format!("background_rate = {} is negative", config.schedule.background_rate),
        ));
    }
    for (i, e) in config.schedule.events.iter().enumerate() {
        if e.start_step >= e.end_step {
            out.push(violation(
                "stimulus_window",
                format!("stimulus {i} window [{}, {}) is empty", e.start_step, e.end_step),
            ));
        }
        if !(e.magnitude >= 0.0) {
            out.push(violation(
                "range",
                format!("stimulus {i} magnitude {} is negative", e.magnitude),
            ));
        }
    }
    if config.total_steps < 1 {
        out.push(violation("total_steps", "total_steps must be at least 1"));
    }
    if config.sample_interval < 1 {
        out.push(violation("sample_interval", "sample_interval must be at least 1"));
    }
    out
}

/// Trail and agent state captured mid-run.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub trail: TrailLattice,
    pub agents: Vec<Agent>,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub mask: ArenaMask,
    pub spacetime: SpaceTimeMatrix,
    pub summary: RunSummary,
    pub snapshots: Vec<Snapshot>,
}

/// Columns used as "inside" for the contrast index: those covered by the
/// stimuli, or the middle third when there are none.
pub fn inside_columns(mask: &ArenaMask, schedule: &StimulusSchedule) -> Vec<usize> {
    let mut region = Region::empty(mask.width(), mask.height());
    for e in &schedule.events {
        region.union_with(&e.region);
    }
    if region.is_empty() {
        region = middle_third_region(mask);
    }
    region.column_set()
}

/// Run a configuration to completion. Validation failures are reported
/// before any step is taken.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord, ConfigError> {
    let violations = validate(config);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(ConfigError::Invalid(text.join("; ")));
    }
    let mask = config.arena.build()?;
    let schedule = config.schedule.build(&mask);
    let windows = SummaryWindows {
        inside_columns: inside_columns(&mask, &schedule),
        baseline: BASELINE_WINDOW,
        stimulus_start: schedule.stimulus_start(),
        stimulus_end: schedule.stimulus_end(),
        onset_window: ONSET_WINDOW,
        recovery_factor: RECOVERY_FACTOR,
    };
    let mut world = World::new(
        mask.clone(),
        config.population,
        schedule,
        config.model,
        config.seed,
    )?;

    let mut spacetime = SpaceTimeMatrix::new(mask.width(), config.sample_interval);
    let mut snapshots = Vec::new();
    for step in 0..=config.total_steps {
        sample_if_due(&world, step, &mut spacetime, config.sample_interval);
        if config.snapshot_interval > 0 && step.is_multiple_of(config.snapshot_interval) {
            snapshots.push(Snapshot {
                step,
                trail: world.trail.clone(),
                agents: world.agents.clone(),
            });
        }
        if step < config.total_steps {
            world.step(step);
        }
    }
    debug_assert!(world.consistency_violations().is_empty());

    let summary = summarize(&spacetime, &windows);
    Ok(RunRecord {
        config: config.clone(),
        mask,
        spacetime,
        summary,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn li_preset_values() {
        let c = preset_li();
        assert_eq!(c.population, 8000);
        assert_eq!(c.schedule.events[0].start_step, 1000);
        assert_eq!(c.schedule.events[0].end_step, 4000);
        assert_eq!(c.sample_interval, 10);
        assert_eq!(c.total_steps, 20_000);
        assert_eq!((c.arena.width, c.arena.height, c.arena.border_rows), (300, 100, 10));
        assert_eq!(c.seed, DEFAULT_SEED);
    }

    #[test]
    fn la_preset_differs_only_in_kind() {
        let (li, la) = (preset_li(), preset_la());
        assert_eq!(la.schedule.events[0].kind, StimulusKind::Light);
        assert_eq!(la.schedule.events[0].region, li.schedule.events[0].region);
        assert!(la.total_steps >= 4000 + 15_000);
        let mut relabelled = la.clone();
        relabelled.schedule.events[0].kind = StimulusKind::Attractant;
        assert_eq!(relabelled, li);
    }

    #[test]
    fn presets_are_valid() {
        assert!(validate(&preset_li()).is_empty());
        assert!(validate(&preset_la()).is_empty());
        assert!(validate(&preset_li().reduced()).is_empty());
    }

    #[test]
    fn capacity_violation() {
        let mut c = preset_li();
        c.population = 24_001;
        let v = validate(&c);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code, "capacity");
    }

    #[test]
    fn decay_range_violation() {
        let mut c = preset_li();
        c.model.decay = 1.5;
        let v = validate(&c);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code, "range");
        assert!(v[0].message.contains("decay"));
    }

    #[test]
    fn structural_violations_are_all_reported() {
        let mut c = preset_li();
        c.total_steps = 0;
        c.sample_interval = 0;
        c.schedule.events[0].end_step = 500;
        let codes: Vec<_> = validate(&c).into_iter().map(|v| v.code).collect();
        assert_eq!(codes, vec!["stimulus_window", "total_steps", "sample_interval"]);
        assert!(run(&c).is_err());
    }

    #[test]
    fn single_step_run() {
        let mut c = preset_li().reduced();
        c.total_steps = 1;
        let r = run(&c).unwrap();
        assert_eq!(r.spacetime.len(), 1);
        assert!(r.summary.onset_columns.is_empty());
        assert_eq!(r.summary.recovery_step, None);
    }

    #[test]
    fn snapshots_follow_interval() {
        let mut c = preset_li().reduced();
        c.total_steps = 100;
        c.snapshot_interval = 25;
        let r = run(&c).unwrap();
        let steps: Vec<_> = r.snapshots.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![0, 25, 50, 75, 100]);
    }

    #[test]
    fn inside_columns_default_to_middle_third() {
        let mask = ArenaMask::tube(30, 10, 1).unwrap();
        let cols = inside_columns(&mask, &StimulusSchedule::default());
        assert_eq!(cols, (10..20).collect::<Vec<_>>());
    }
}
