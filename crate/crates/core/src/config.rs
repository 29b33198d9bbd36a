//! Flat `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment. Every key must be known.
//! Without `preset = li|la` every key is required (the `stimulus_*` keys only
//! when `stimulus` is not `none`); with a preset, keys override its values.
//! Angles are given in degrees.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::agents::{BlockedTurn, ModelParams, StageOrder};
use crate::error::ConfigError;
use crate::experiment::{
    preset_la, preset_li, ArenaConfig, EventSpec, ExperimentConfig, RegionSpec, ScheduleSpec,
};
use crate::stimulus::StimulusKind;
use crate::Real;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` is set twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    Type {
        line: usize,
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("missing keys (no preset given): {}", .0.join(", "))]
    Missing(Vec<&'static str>),
}

/// Every accepted key, in echo order.
pub const KEYS: &[&str] = &[
    "preset",
    "seed",
    "width",
    "height",
    "border_rows",
    "population",
    "total_steps",
    "sample_interval",
    "snapshot_interval",
    "sensor_angle_deg",
    "rotation_angle_deg",
    "sensor_offset",
    "step_size",
    "deposit",
    "decay",
    "light_sensor_attenuation",
    "light_trail_factor",
    "stage_order",
    "blocked_turn",
    "background_rate",
    "stimulus",
    "stimulus_rate",
    "stimulus_start",
    "stimulus_end",
    "stimulus_columns",
];

const STIMULUS_KEYS: &[&str] = &[
    "stimulus_rate",
    "stimulus_start",
    "stimulus_end",
    "stimulus_columns",
];

/// A value type the config grammar knows how to read and write.
trait Value: Sized {
    const EXPECTED: &'static str;
    fn parse_value(s: &str) -> Option<Self>;
}

macro_rules! from_str_value {
    ($($t:ty => $e:literal),*) => {$(
        impl Value for $t {
            const EXPECTED: &'static str = $e;
            fn parse_value(s: &str) -> Option<Self> {
                <$t>::from_str(s).ok()
            }
        }
    )*};
}
from_str_value!(u64 => "a non-negative integer", usize => "a non-negative integer");

impl Value for Real {
    const EXPECTED: &'static str = "a number";
    fn parse_value(s: &str) -> Option<Self> {
        Real::from_str(s).ok().filter(|v| v.is_finite())
    }
}

impl Value for StageOrder {
    const EXPECTED: &'static str = "per_agent or sense_all_first";
    fn parse_value(s: &str) -> Option<Self> {
        match s {
            "per_agent" => Some(StageOrder::PerAgent),
            "sense_all_first" => Some(StageOrder::SenseAllFirst),
            _ => None,
        }
    }
}

impl Value for BlockedTurn {
    const EXPECTED: &'static str = "uniform or rotation";
    fn parse_value(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(BlockedTurn::Uniform),
            "rotation" => Some(BlockedTurn::Rotation),
            _ => None,
        }
    }
}

impl Value for Option<StimulusKind> {
    const EXPECTED: &'static str = "attractant, light or none";
    fn parse_value(s: &str) -> Option<Self> {
        match s {
            "attractant" => Some(Some(StimulusKind::Attractant)),
            "light" => Some(Some(StimulusKind::Light)),
            "none" => Some(None),
            _ => None,
        }
    }
}

impl Value for RegionSpec {
    const EXPECTED: &'static str = "middle_third or <start>..<end>";
    fn parse_value(s: &str) -> Option<Self> {
        if s == "middle_third" {
            return Some(RegionSpec::MiddleThird);
        }
        let (a, b) = s.split_once("..")?;
        Some(RegionSpec::Columns {
            start: a.trim().parse().ok()?,
            end: b.trim().parse().ok()?,
        })
    }
}

fn stage_order_str(s: StageOrder) -> &'static str {
    match s {
        StageOrder::PerAgent => "per_agent",
        StageOrder::SenseAllFirst => "sense_all_first",
    }
}

fn blocked_turn_str(b: BlockedTurn) -> &'static str {
    match b {
        BlockedTurn::Uniform => "uniform",
        BlockedTurn::Rotation => "rotation",
    }
}

fn region_str(r: RegionSpec) -> String {
    match r {
        RegionSpec::MiddleThird => "middle_third".into(),
        RegionSpec::Columns { start, end } => format!("{start}..{end}"),
    }
}

struct Entries<'a> {
    values: BTreeMap<&'a str, (usize, &'a str)>,
    missing: Vec<&'static str>,
}

impl Entries<'_> {
    /// The file's value for `key`, else `fallback`, else a recorded miss.
    fn get<T: Value>(&mut self, key: &'static str, fallback: Option<T>) -> Result<Option<T>, ParseError> {
        match self.values.get(key) {
            Some(&(line, raw)) => T::parse_value(raw).map(Some).ok_or_else(|| ParseError::Type {
                line,
                key: key.into(),
                expected: T::EXPECTED,
                value: raw.into(),
            }),
            None if fallback.is_some() => Ok(fallback),
            None => {
                self.missing.push(key);
                Ok(None)
            }
        }
    }
}

/// Parse configuration text. The result is not validated; see
/// [`crate::experiment::validate`].
pub fn parse(text: &str) -> Result<ExperimentConfig, ParseError> {
    let mut values = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ParseError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ParseError::Syntax { line });
        }
        if !KEYS.contains(&key) {
            return Err(ParseError::UnknownKey {
                line,
                key: key.into(),
            });
        }
        if values.insert(key, (line, value)).is_some() {
            return Err(ParseError::Duplicate {
                line,
                key: key.into(),
            });
        }
    }

    let base = match values.get("preset") {
        None => None,
        Some(&(_, "li")) => Some(preset_li()),
        Some(&(_, "la")) => Some(preset_la()),
        Some(&(line, value)) => {
            return Err(ParseError::Type {
                line,
                key: "preset".into(),
                expected: "li or la",
                value: value.into(),
            })
        }
    };
    let mut e = Entries {
        values,
        missing: Vec::new(),
    };
    let b = base.as_ref();
    let bm = b.map(|c| c.model);
    let bev = b.and_then(|c| c.schedule.events.first().copied());

    let seed = e.get("seed", b.map(|c| c.seed))?;
    let width = e.get("width", b.map(|c| c.arena.width))?;
    let height = e.get("height", b.map(|c| c.arena.height))?;
    let border_rows = e.get("border_rows", b.map(|c| c.arena.border_rows))?;
    let population = e.get("population", b.map(|c| c.population))?;
    let total_steps = e.get("total_steps", b.map(|c| c.total_steps))?;
    let sample_interval = e.get("sample_interval", b.map(|c| c.sample_interval))?;
    let snapshot_interval = e.get("snapshot_interval", b.map(|c| c.snapshot_interval))?;
    let sensor_angle: Option<Real> =
        e.get("sensor_angle_deg", bm.map(|m| m.sensor_angle.to_degrees()))?;
    let rotation_angle: Option<Real> =
        e.get("rotation_angle_deg", bm.map(|m| m.rotation_angle.to_degrees()))?;
    let sensor_offset = e.get("sensor_offset", bm.map(|m| m.sensor_offset))?;
    let step_size = e.get("step_size", bm.map(|m| m.step_size))?;
    let deposit = e.get("deposit", bm.map(|m| m.deposit))?;
    let decay = e.get("decay", bm.map(|m| m.decay))?;
    let attenuation = e.get("light_sensor_attenuation", bm.map(|m| m.light_sensor_attenuation))?;
    let trail_factor = e.get("light_trail_factor", bm.map(|m| m.light_trail_factor))?;
    let stage_order = e.get("stage_order", bm.map(|m| m.stage_order))?;
    let blocked_turn = e.get("blocked_turn", bm.map(|m| m.blocked_turn))?;
    let background_rate = e.get("background_rate", b.map(|c| c.schedule.background_rate))?;
    let kind: Option<Option<StimulusKind>> = e.get("stimulus", b.map(|_| bev.map(|ev| ev.kind)))?;

    let event = match kind {
        Some(Some(kind)) => {
            let magnitude = e.get("stimulus_rate", bev.map(|ev| ev.magnitude))?;
            let start = e.get("stimulus_start", bev.map(|ev| ev.start_step))?;
            let end = e.get("stimulus_end", bev.map(|ev| ev.end_step))?;
            let region = e.get("stimulus_columns", bev.map(|ev| ev.region))?;
            match (magnitude, start, end, region) {
                (Some(magnitude), Some(start_step), Some(end_step), Some(region)) => Some(EventSpec {
                    kind,
                    region,
                    magnitude,
                    start_step,
                    end_step,
                }),
                _ => None,
            }
        }
        Some(None) => {
            // Stimulus parameters without a stimulus are still type-checked.
            for &key in STIMULUS_KEYS {
                if let Some(&(line, raw)) = e.values.get(key) {
                    let ok = match key {
                        "stimulus_rate" => Real::parse_value(raw).is_some(),
                        "stimulus_columns" => RegionSpec::parse_value(raw).is_some(),
                        _ => u64::parse_value(raw).is_some(),
                    };
                    if !ok {
                        return Err(ParseError::Type {
                            line,
                            key: key.into(),
                            expected: "a value of the stimulus key's type",
                            value: raw.into(),
                        });
                    }
                }
            }
            None
        }
        None => None,
    };

    if !e.missing.is_empty() {
        return Err(ParseError::Missing(e.missing));
    }
    // Every field is present once nothing is missing.
    let model = ModelParams {
        sensor_angle: sensor_angle.unwrap().to_radians(),
        rotation_angle: rotation_angle.unwrap().to_radians(),
        sensor_offset: sensor_offset.unwrap(),
        step_size: step_size.unwrap(),
        deposit: deposit.unwrap(),
        decay: decay.unwrap(),
        light_sensor_attenuation: attenuation.unwrap(),
        light_trail_factor: trail_factor.unwrap(),
        stage_order: stage_order.unwrap(),
        blocked_turn: blocked_turn.unwrap(),
    };
    let mut config = ExperimentConfig {
        arena: ArenaConfig {
            width: width.unwrap(),
            height: height.unwrap(),
            border_rows: border_rows.unwrap(),
        },
        population: population.unwrap(),
        model,
        schedule: ScheduleSpec {
            background_rate: background_rate.unwrap(),
            events: event.into_iter().collect(),
        },
        total_steps: total_steps.unwrap(),
        sample_interval: sample_interval.unwrap(),
        snapshot_interval: snapshot_interval.unwrap(),
        seed: seed.unwrap(),
    };
    // Keep the preset's exact angles unless the file overrides them, so
    // `preset = li` alone reproduces the preset bit for bit.
    if let Some(bm) = bm {
        if !e.values.contains_key("sensor_angle_deg") {
            config.model.sensor_angle = bm.sensor_angle;
        }
        if !e.values.contains_key("rotation_angle_deg") {
            config.model.rotation_angle = bm.rotation_angle;
        }
    }
    Ok(config)
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

/// Render a configuration as a complete, preset-free config file. Fails for
/// schedules with more than one event, which the format cannot express.
pub fn to_text(config: &ExperimentConfig) -> Result<String, ConfigError> {
    if config.schedule.events.len() > 1 {
        return Err(ConfigError::Invalid(
            "config files hold at most one stimulus".into(),
        ));
    }
    let m = &config.model;
    let mut s = String::new();
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("seed", &config.seed);
    kv("width", &config.arena.width);
    kv("height", &config.arena.height);
    kv("border_rows", &config.arena.border_rows);
    kv("population", &config.population);
    kv("total_steps", &config.total_steps);
    kv("sample_interval", &config.sample_interval);
    kv("snapshot_interval", &config.snapshot_interval);
    kv("sensor_angle_deg", &m.sensor_angle.to_degrees());
    kv("rotation_angle_deg", &m.rotation_angle.to_degrees());
    kv("sensor_offset", &m.sensor_offset);
    kv("step_size", &m.step_size);
    kv("deposit", &m.deposit);
    kv("decay", &m.decay);
    kv("light_sensor_attenuation", &m.light_sensor_attenuation);
    kv("light_trail_factor", &m.light_trail_factor);
    kv("stage_order", &stage_order_str(m.stage_order));
    kv("blocked_turn", &blocked_turn_str(m.blocked_turn));
    kv("background_rate", &config.schedule.background_rate);
    match config.schedule.events.first() {
        None => kv("stimulus", &"none"),
        Some(ev) => {
            kv("stimulus", &ev.kind.as_str());
            kv("stimulus_rate", &ev.magnitude);
            kv("stimulus_start", &ev.start_step);
            kv("stimulus_end", &ev.end_step);
            kv("stimulus_columns", &region_str(ev.region));
        }
    }
    Ok(s)
}
