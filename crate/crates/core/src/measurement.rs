//! Observables built on per-column population counts: density profiles,
//! the space-time matrix (kymograph) and the statistics that quantify
//! contrast, uniformity, recovery and where changes begin.

use serde::{Deserialize, Serialize};

use crate::agents::{Agent, World};
use crate::error::MeasurementError;

/// Samples a recovered profile must stay uniform for.
pub const RECOVERY_PERSISTENCE: usize = 50;

/// Half-width, in columns, of the triangular kernel that smooths the
/// per-column change signal before peaks are picked.
pub const ONSET_SMOOTHING: usize = 5;

/// Agent count per column at one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityProfile {
    pub step: u64,
    pub counts: Vec<u32>,
}

/// Column counts over time, one row per sample, earliest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceTimeMatrix {
    width: usize,
    sample_interval: u64,
    steps: Vec<u64>,
    data: Vec<u32>,
}

impl SpaceTimeMatrix {
    pub fn new(width: usize, sample_interval: u64) -> Self {
        assert!(sample_interval >= 1, "sample interval must be positive");
        Self {
            width,
            sample_interval,
            steps: Vec::new(),
            data: Vec::new(),
        }
    }

    /// Append a row. Panics if the step does not follow the previous row
    /// by exactly one interval or the width differs.
    pub fn push(&mut self, step: u64, counts: &[u32]) {
        assert_eq!(counts.len(), self.width, "row width");
        if let Some(&last) = self.steps.last() {
            assert_eq!(step, last + self.sample_interval, "rows must be one interval apart");
        }
        self.steps.push(step);
        self.data.extend_from_slice(counts);
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn sample_interval(&self) -> u64 {
        self.sample_interval
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[u64] {
        &self.steps
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = (u64, &[u32])> {
        self.steps.iter().copied().zip(self.data.chunks_exact(self.width.max(1)))
    }

    pub fn profile(&self, i: usize) -> DensityProfile {
        DensityProfile {
            step: self.steps[i],
            counts: self.row(i).to_vec(),
        }
    }

    pub fn min_max(&self) -> Option<(u32, u32)> {
        let min = *self.data.iter().min()?;
        let max = *self.data.iter().max()?;
        Some((min, max))
    }
}

/// Agents per column, binned by `floor(x)`.
pub fn column_density(agents: &[Agent], width: usize) -> Vec<u32> {
    let mut counts = vec![0u32; width];
    for a in agents {
        let col = (a.x as usize).min(width - 1);
        counts[col] += 1;
    }
    counts
}

/// Mean count inside `inside` divided by mean count over the other columns.
///
/// Returns `+inf` when only the outside mean is zero and NaN when both are.
pub fn contrast_index(counts: &[u32], inside: &[usize]) -> Result<f64, MeasurementError> {
    let width = counts.len();
    let mut member = vec![false; width];
    for &c in inside {
        if c >= width {
            return Err(MeasurementError::BadColumnSet(width));
        }
        member[c] = true;
    }
    let n_in = member.iter().filter(|&&m| m).count();
    if n_in == 0 || n_in == width {
        return Err(MeasurementError::BadColumnSet(width));
    }
    let (mut sum_in, mut sum_out) = (0u64, 0u64);
    for (&c, &m) in counts.iter().zip(&member) {
        if m {
            sum_in += u64::from(c);
        } else {
            sum_out += u64::from(c);
        }
    }
    let mean_in = sum_in as f64 / n_in as f64;
    let mean_out = sum_out as f64 / (width - n_in) as f64;
    if mean_out == 0.0 {
        return Ok(if mean_in > 0.0 { f64::INFINITY } else { f64::NAN });
    }
    Ok(mean_in / mean_out)
}

/// Population standard deviation over mean of the column counts.
pub fn uniformity_cv(counts: &[u32]) -> Result<f64, MeasurementError> {
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| f64::from(c)).sum::<f64>() / n;
    if !(mean > 0.0) {
        return Err(MeasurementError::ZeroMean);
    }
    let var = counts
        .iter()
        .map(|&c| {
            let d = f64::from(c) - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    Ok(var.sqrt() / mean)
}

/// Mean uniformity CV over samples with step in `[from, to)`; `None` when
/// no sample falls in the window.
pub fn baseline_cv(spacetime: &SpaceTimeMatrix, from: u64, to: u64) -> Option<f64> {
    let cvs: Vec<f64> = spacetime
        .rows()
        .filter(|(s, _)| (from..to).contains(s))
        .filter_map(|(_, row)| uniformity_cv(row).ok())
        .collect();
    (!cvs.is_empty()).then(|| cvs.iter().sum::<f64>() / cvs.len() as f64)
}

/// First sampled step at or after `stimulus_end` whose CV is at most
/// `factor * baseline_cv` and stays there for [`RECOVERY_PERSISTENCE`]
/// consecutive samples.
pub fn recovery_step(
    spacetime: &SpaceTimeMatrix,
    stimulus_end: u64,
    baseline_cv: f64,
    factor: f64,
) -> Option<u64> {
    debug_assert!(factor >= 1.0);
    let threshold = factor * baseline_cv;
    let mut run_start = None;
    let mut run_len = 0usize;
    for (step, row) in spacetime.rows().filter(|(s, _)| *s >= stimulus_end) {
        let uniform = uniformity_cv(row).is_ok_and(|cv| cv <= threshold);
        if uniform {
            if run_len == 0 {
                run_start = Some(step);
            }
            run_len += 1;
            if run_len >= RECOVERY_PERSISTENCE {
                return run_start;
            }
        } else {
            run_len = 0;
        }
    }
    None
}

/// Per-column total absolute change between consecutive samples in
/// `[onset_step, onset_step + window]`.
pub fn change_signal(
    spacetime: &SpaceTimeMatrix,
    onset_step: u64,
    window: u64,
) -> Result<Vec<f64>, MeasurementError> {
    let end = onset_step.saturating_add(window);
    let rows: Vec<&[u32]> = spacetime
        .rows()
        .filter(|(s, _)| (onset_step..=end).contains(s))
        .map(|(_, r)| r)
        .collect();
    if rows.len() < 2 {
        return Err(MeasurementError::TooFewSamples(rows.len()));
    }
    let mut change = vec![0.0; spacetime.width()];
    for pair in rows.windows(2) {
        for (acc, (&a, &b)) in change.iter_mut().zip(pair[0].iter().zip(pair[1])) {
            *acc += f64::from(a.abs_diff(b));
        }
    }
    Ok(change)
}

/// Circular triangular smoothing with weights `h + 1 - |d|` for `|d| <= h`.
fn smooth_circular(signal: &[f64], half_width: usize) -> Vec<f64> {
    let n = signal.len();
    if half_width == 0 || n == 0 {
        return signal.to_vec();
    }
    let h = half_width as isize;
    let norm: f64 = (-h..=h).map(|d| (h + 1 - d.abs()) as f64).sum();
    (0..n)
        .map(|i| {
            (-h..=h)
                .map(|d| {
                    let j = (i as isize + d).rem_euclid(n as isize) as usize;
                    (h + 1 - d.abs()) as f64 * signal[j]
                })
                .sum::<f64>()
                / norm
        })
        .collect()
}

/// Circular local maxima. A plateau counts once, at its lowest index, when
/// both neighbours outside it are strictly lower. Returned as `(index, value)`.
fn circular_local_maxima(signal: &[f64]) -> Vec<(usize, f64)> {
    let n = signal.len();
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let prev = |i: usize| if i == 0 { n - 1 } else { i - 1 };
    let next = |i: usize| if i + 1 == n { 0 } else { i + 1 };
    for start in 0..n {
        let v = signal[start];
        // Only consider the first cell of a plateau.
        if signal[prev(start)] == v {
            continue;
        }
        if signal[prev(start)] > v {
            continue;
        }
        let mut end = start;
        let mut len = 1;
        while signal[next(end)] == v && len < n {
            end = next(end);
            len += 1;
        }
        if len < n && signal[next(end)] < v {
            out.push((start, v));
        }
    }
    // A plateau wrapping past index 0 is reported at its first cell after
    // the wrap point; report it at its lowest index instead.
    for entry in &mut out {
        let (start, v) = *entry;
        if start > 0 && signal[0] == v {
            let mut i = start;
            let mut lowest = start;
            loop {
                i = next(i);
                if signal[i] != v {
                    break;
                }
                lowest = lowest.min(i);
            }
            entry.0 = lowest;
        }
    }
    out
}

/// Columns of the two strongest local maxima of the smoothed change signal
/// in the window starting at `onset_step`, ascending. Empty when the signal
/// has no local maximum (e.g. a constant matrix).
pub fn onset_columns(
    spacetime: &SpaceTimeMatrix,
    onset_step: u64,
    window: u64,
) -> Result<Vec<usize>, MeasurementError> {
    let change = change_signal(spacetime, onset_step, window)?;
    let smoothed = smooth_circular(&change, ONSET_SMOOTHING);
    let mut peaks = circular_local_maxima(&smoothed);
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut cols: Vec<usize> = peaks.into_iter().take(2).map(|(i, _)| i).collect();
    cols.sort_unstable();
    Ok(cols)
}

/// Append the world's column density to `spacetime` when `step` is a
/// multiple of `interval`.
pub fn sample_if_due(world: &World, step: u64, spacetime: &mut SpaceTimeMatrix, interval: u64) {
    debug_assert!(interval >= 1);
    if step.is_multiple_of(interval) {
        spacetime.push(step, &column_density(&world.agents, world.mask.width()));
    }
}

/// Aggregated statistics of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub contrast_series: Vec<(u64, f64)>,
    pub uniformity_series: Vec<(u64, f64)>,
    pub baseline_cv: Option<f64>,
    /// Contrast sample furthest from 1 on a log scale.
    pub contrast_peak: Option<f64>,
    pub contrast_peak_step: Option<u64>,
    pub recovery_step: Option<u64>,
    pub onset_columns: Vec<usize>,
}

/// Settings for [`summarize`].
#[derive(Debug, Clone)]
pub struct SummaryWindows {
    /// Columns treated as "inside" for the contrast index.
    pub inside_columns: Vec<usize>,
    pub baseline: (u64, u64),
    pub stimulus_start: Option<u64>,
    pub stimulus_end: Option<u64>,
    pub onset_window: u64,
    pub recovery_factor: f64,
}

pub fn summarize(spacetime: &SpaceTimeMatrix, windows: &SummaryWindows) -> RunSummary {
    let contrast_series: Vec<(u64, f64)> = spacetime
        .rows()
        .filter_map(|(s, row)| contrast_index(row, &windows.inside_columns).ok().map(|c| (s, c)))
        .collect();
    let uniformity_series: Vec<(u64, f64)> = spacetime
        .rows()
        .filter_map(|(s, row)| uniformity_cv(row).ok().map(|c| (s, c)))
        .collect();
    let baseline = baseline_cv(spacetime, windows.baseline.0, windows.baseline.1);

    let peak = contrast_series
        .iter()
        .filter(|(_, c)| c.is_finite() && *c > 0.0)
        .fold(None::<(u64, f64)>, |best, &(s, c)| match best {
            Some((_, b)) if b.ln().abs() >= c.ln().abs() => best,
            _ => Some((s, c)),
        });

    let recovery = match (windows.stimulus_end, baseline) {
        (Some(end), Some(base)) => recovery_step(spacetime, end, base, windows.recovery_factor),
        _ => None,
    };
    let onset = windows
        .stimulus_start
        .and_then(|start| onset_columns(spacetime, start, windows.onset_window).ok())
        .unwrap_or_default();

    RunSummary {
        contrast_series,
        uniformity_series,
        baseline_cv: baseline,
        contrast_peak: peak.map(|p| p.1),
        contrast_peak_step: peak.map(|p| p.0),
        recovery_step: recovery,
        onset_columns: onset,
    }
}
