//! Output files: density CSV, PGM images, the JSON summary and the config
//! echo. Every file is written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agents::Agent;
use crate::config;
use crate::error::ConfigError;
use crate::experiment::{ExperimentConfig, RunRecord};
use crate::lattice::{ArenaMask, TrailLattice};
use crate::measurement::SpaceTimeMatrix;

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("space-time matrix is empty")]
    EmptyMatrix,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EmitError + '_ {
    move |source| EmitError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write `bytes` to `path` via a temporary file in the same directory.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), EmitError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| EmitError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

/// `step,c0,...,c<W-1>` followed by one row of raw counts per sample.
pub fn density_csv(spacetime: &SpaceTimeMatrix) -> Result<String, EmitError> {
    if spacetime.is_empty() {
        return Err(EmitError::EmptyMatrix);
    }
    let mut out = String::from("step");
    for c in 0..spacetime.width() {
        out.push_str(",c");
        out.push_str(&c.to_string());
    }
    out.push('\n');
    for (step, counts) in spacetime.rows() {
        out.push_str(&step.to_string());
        for n in counts {
            out.push(',');
            out.push_str(&n.to_string());
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_density_csv(spacetime: &SpaceTimeMatrix, path: &Path) -> Result<(), EmitError> {
    atomic_write(path, density_csv(spacetime)?.as_bytes())
}

fn pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    debug_assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Map `v` in `[min, max]` onto `0..=255`, rounding half up, in exact
/// integer arithmetic.
fn scale_count(v: u32, min: u32, max: u32) -> u8 {
    let (num, den) = (2 * 255 * u64::from(v - min) + u64::from(max - min), 2 * u64::from(max - min));
    (num / den) as u8
}

/// Binary PGM of the matrix, one row per sample with the earliest at the
/// top. A matrix with no spread renders mid-grey.
pub fn spacetime_pgm(spacetime: &SpaceTimeMatrix) -> Result<Vec<u8>, EmitError> {
    let (min, max) = spacetime.min_max().ok_or(EmitError::EmptyMatrix)?;
    let pixels: Vec<u8> = spacetime
        .rows()
        .flat_map(|(_, r)| r.iter())
        .map(|&v| if max == min { 128 } else { scale_count(v, min, max) })
        .collect();
    Ok(pgm(spacetime.width(), spacetime.len(), &pixels))
}

pub fn render_spacetime(spacetime: &SpaceTimeMatrix, path: &Path) -> Result<(), EmitError> {
    atomic_write(path, &spacetime_pgm(spacetime)?)
}

/// Binary PGM of the arena: trail min-max normalised over habitable cells,
/// agent cells at 255, walls at 0. A trail with no spread renders black.
pub fn snapshot_pgm(mask: &ArenaMask, trail: &TrailLattice, agents: &[Agent]) -> Vec<u8> {
    let (min, max) = mask
        .habitable_indices()
        .map(|i| trail.get_index(i) as f64)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = max - min;
    let mut pixels: Vec<u8> = (0..mask.width() * mask.height())
        .map(|i| {
            if !mask.is_habitable_index(i) || !(span > 0.0) {
                0
            } else {
                let t = (trail.get_index(i) as f64 - min) / span;
                (t * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
            }
        })
        .collect();
    for a in agents {
        if let Some(i) = mask.cell_of(a.x, a.y) {
            pixels[i] = 255;
        }
    }
    pgm(mask.width(), mask.height(), &pixels)
}

pub fn render_snapshot(
    mask: &ArenaMask,
    trail: &TrailLattice,
    agents: &[Agent],
    path: &Path,
) -> Result<(), EmitError> {
    atomic_write(path, &snapshot_pgm(mask, trail, agents))
}

/// SHA-256 of the configuration's JSON form, hex encoded.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let json = serde_json::to_vec(config).expect("configurations always serialise");
    Sha256::digest(&json)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub contrast_peak: Option<f64>,
    pub contrast_peak_step: Option<u64>,
    pub recovery_step: Option<u64>,
    pub onset_columns: Vec<usize>,
    pub baseline_cv: Option<f64>,
    pub config_hash: String,
}

impl SummaryFile {
    pub fn from_record(record: &RunRecord) -> Self {
        let s = &record.summary;
        Self {
            contrast_peak: s.contrast_peak,
            contrast_peak_step: s.contrast_peak_step,
            recovery_step: s.recovery_step,
            onset_columns: s.onset_columns.clone(),
            baseline_cv: s.baseline_cv,
            config_hash: config_hash(&record.config),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary always serialises");
        s.push('\n');
        s
    }
}

impl std::fmt::Display for SummaryFile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
        writeln!(
            f,
            "contrast peak: {} at step {}",
            opt(self.contrast_peak.map(|c| format!("{c:.4}"))),
            opt(self.contrast_peak_step.map(|s| s.to_string()))
        )?;
        writeln!(f, "baseline cv: {}", opt(self.baseline_cv.map(|c| format!("{c:.4}"))))?;
        writeln!(f, "recovery step: {}", opt(self.recovery_step.map(|s| s.to_string())))?;
        write!(f, "onset columns: {:?}", self.onset_columns)
    }
}

/// Write the full output bundle for a run into `dir` and return the summary.
///
/// Layout: `density.csv`, `spacetime.pgm`, `summary.json`, `config.txt`,
/// and `snapshots/step_<k>.pgm` when snapshots were taken.
pub fn write_bundle(record: &RunRecord, dir: &Path) -> Result<SummaryFile, EmitError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_density_csv(&record.spacetime, &dir.join("density.csv"))?;
    render_spacetime(&record.spacetime, &dir.join("spacetime.pgm"))?;
    if !record.snapshots.is_empty() {
        let snap_dir = dir.join("snapshots");
        std::fs::create_dir_all(&snap_dir).map_err(io_err(&snap_dir))?;
        for s in &record.snapshots {
            let path = snap_dir.join(format!("step_{}.pgm", s.step));
            render_snapshot(&record.mask, &s.trail, &s.agents, &path)?;
        }
    }
    let summary = SummaryFile::from_record(record);
    atomic_write(&dir.join("summary.json"), summary.to_json().as_bytes())?;
    atomic_write(&dir.join("config.txt"), config::to_text(&record.config)?.as_bytes())?;
    Ok(summary)
}
