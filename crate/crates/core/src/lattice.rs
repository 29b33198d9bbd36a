//! The arena: habitability mask, chemoattractant trail field and the
//! periodic-in-x coordinate arithmetic shared by every other module.
//!
//! Cells are stored row-major, `index = y * width + x`. The horizontal axis
//! always wraps. The vertical axis wraps only on a torus; tube arenas are
//! walled top and bottom instead.

use crate::error::ConfigError;
use crate::Real;

/// Which cells agents may occupy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArenaMask {
    width: usize,
    height: usize,
    habitable: Vec<bool>,
    habitable_count: usize,
    periodic_y: bool,
}

impl ArenaMask {
    pub fn new(width: usize, height: usize, habitable: Vec<bool>) -> Result<Self, ConfigError> {
        if width < 3 || height < 3 {
            return Err(ConfigError::Dimensions(format!(
                "arena must be at least 3x3, got {width}x{height}"
            )));
        }
        if habitable.len() != width * height {
            return Err(ConfigError::Dimensions(format!(
                "mask has {} cells, expected {}",
                habitable.len(),
                width * height
            )));
        }
        let habitable_count = habitable.iter().filter(|&&h| h).count();
        if habitable_count == 0 {
            return Err(ConfigError::Dimensions("arena has no habitable cell".into()));
        }
        Ok(Self {
            width,
            height,
            habitable,
            habitable_count,
            periodic_y: false,
        })
    }

    /// A horizontal tube: `border_rows` walled rows at the top and bottom,
    /// a full-width habitable band between them, open (wrapped) left and right.
    pub fn tube(width: usize, height: usize, border_rows: usize) -> Result<Self, ConfigError> {
        if height <= 2 * border_rows {
            return Err(ConfigError::Dimensions(format!(
                "height {height} leaves no habitable band with {border_rows} border rows"
            )));
        }
        let habitable = (0..height)
            .flat_map(|y| {
                let inside = y >= border_rows && y < height - border_rows;
                std::iter::repeat_n(inside, width)
            })
            .collect();
        Self::new(width, height, habitable)
    }

    /// Fully habitable lattice wrapped on both axes.
    pub fn torus(width: usize, height: usize) -> Result<Self, ConfigError> {
        let mut m = Self::new(width, height, vec![true; width * height])?;
        m.periodic_y = true;
        Ok(m)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn periodic_y(&self) -> bool {
        self.periodic_y
    }

    pub fn habitable_count(&self) -> usize {
        self.habitable_count
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn is_habitable(&self, x: usize, y: usize) -> bool {
        self.habitable[y * self.width + x]
    }

    #[inline]
    pub fn is_habitable_index(&self, idx: usize) -> bool {
        self.habitable[idx]
    }

    pub fn cells(&self) -> &[bool] {
        &self.habitable
    }

    /// Habitable cell indices in row-major order.
    pub fn habitable_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.habitable
            .iter()
            .enumerate()
            .filter_map(|(i, &h)| h.then_some(i))
    }

    /// Lattice cell containing a continuous position, `None` when `y` leaves
    /// a lattice that does not wrap vertically. `x` is wrapped first.
    #[inline]
    pub fn cell_of(&self, x: Real, y: Real) -> Option<usize> {
        let y = if self.periodic_y { wrap_x(y, self.height) } else { y };
        if !(y >= 0.0) || y >= self.height as Real {
            return None;
        }
        // Both coordinates are non-negative here, so truncation is floor.
        let cx = (wrap_x(x, self.width) as usize).min(self.width - 1);
        let cy = y as usize;
        Some(cy * self.width + cx)
    }
}

/// Wrap a coordinate onto `[0, width)`.
#[inline]
pub fn wrap_x(x: Real, width: usize) -> Real {
    let w = width as Real;
    // Positions move at most a few cells per step, so one add or subtract
    // usually suffices. Both are exact and agree with rem_euclid.
    if (0.0..w).contains(&x) {
        return x;
    }
    let r = if x < 0.0 && x >= -w {
        x + w
    } else if x >= w && x < 2.0 * w {
        x - w
    } else {
        x.rem_euclid(w)
    };
    // rem_euclid can round up to exactly `w` for tiny negative inputs.
    if r >= w {
        0.0
    } else {
        r
    }
}

/// A set of lattice cells, kept both as a bitmask and as a sorted index list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    width: usize,
    height: usize,
    member: Vec<bool>,
    cells: Vec<usize>,
}

impl Region {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            member: vec![false; width * height],
            cells: Vec::new(),
        }
    }

    pub fn from_cells(
        width: usize,
        height: usize,
        cells: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ConfigError> {
        let mut region = Self::empty(width, height);
        for (x, y) in cells {
            if x >= width || y >= height {
                return Err(ConfigError::Invalid(format!(
                    "region cell ({x}, {y}) outside {width}x{height} lattice"
                )));
            }
            region.member[y * width + x] = true;
        }
        region.reindex();
        Ok(region)
    }

    /// Habitable cells of `mask` whose column lies in `columns`.
    pub fn columns(mask: &ArenaMask, columns: std::ops::Range<usize>) -> Self {
        let (w, h) = (mask.width(), mask.height());
        let mut region = Self::empty(w, h);
        for y in 0..h {
            for x in columns.clone().filter(|&x| x < w) {
                if mask.is_habitable(x, y) {
                    region.member[y * w + x] = true;
                }
            }
        }
        region.reindex();
        region
    }

    fn reindex(&mut self) {
        self.cells = self
            .member
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn contains_index(&self, idx: usize) -> bool {
        self.member[idx]
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.member[y * self.width + x]
    }

    /// Row-major cell indices.
    pub fn indices(&self) -> &[usize] {
        &self.cells
    }

    pub fn coords(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells.iter().map(|&i| (i % self.width, i / self.width))
    }

    /// Distinct columns touched by the region, ascending.
    pub fn column_set(&self) -> Vec<usize> {
        let mut seen = vec![false; self.width];
        for &i in &self.cells {
            seen[i % self.width] = true;
        }
        (0..self.width).filter(|&x| seen[x]).collect()
    }

    pub fn union_with(&mut self, other: &Region) {
        debug_assert_eq!((self.width, self.height), (other.width, other.height));
        let mut changed = false;
        for &i in &other.cells {
            if !self.member[i] {
                self.member[i] = true;
                changed = true;
            }
        }
        if changed {
            self.reindex();
        }
    }
}

/// Chemoattractant concentration on every cell, with a back buffer so that
/// diffusion never reads values it has already written.
#[derive(Debug, Clone)]
pub struct TrailLattice {
    width: usize,
    height: usize,
    values: Vec<Real>,
    back: Vec<Real>,
    row_sums: Vec<Real>,
}

impl PartialEq for TrailLattice {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.values == other.values
    }
}

impl TrailLattice {
    pub fn zeros(width: usize, height: usize) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            values: vec![0.0; n],
            back: vec![0.0; n],
            row_sums: vec![0.0; n],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<Real>) -> Result<Self, ConfigError> {
        if values.len() != width * height {
            return Err(ConfigError::Dimensions(format!(
                "{} values for a {width}x{height} lattice",
                values.len()
            )));
        }
        let mut t = Self::zeros(width, height);
        t.values = values;
        Ok(t)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[Real] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Real {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn get_index(&self, idx: usize) -> Real {
        self.values[idx]
    }

    pub fn set(&mut self, x: usize, y: usize, v: Real) {
        self.values[y * self.width + x] = v;
    }

    #[inline]
    pub fn deposit_index(&mut self, idx: usize, amount: Real) {
        self.values[idx] += amount;
    }

    #[inline]
    pub(crate) fn scale_index(&mut self, idx: usize, factor: Real) {
        self.values[idx] *= factor;
    }

    pub fn total(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum()
    }

    fn check_mask(&self, mask: &ArenaMask) -> Result<(), ConfigError> {
        if (self.width, self.height) != (mask.width(), mask.height()) {
            return Err(ConfigError::Mismatch(
                self.width,
                self.height,
                mask.width(),
                mask.height(),
            ));
        }
        Ok(())
    }

    /// Pure form of [`TrailLattice::diffuse_and_decay`]: returns the next
    /// lattice and leaves `self` untouched.
    pub fn diffused(&self, mask: &ArenaMask, decay: Real) -> Result<TrailLattice, ConfigError> {
        let mut next = self.clone();
        next.diffuse_and_decay(mask, decay)?;
        Ok(next)
    }

    /// One diffusion/decay step: every habitable cell becomes the mean of its
    /// 3x3 neighbourhood (x wrapped, walls and rows beyond a non-periodic
    /// lattice contributing zero) scaled by `1 - decay`; inhabitable cells
    /// end at zero.
    pub fn diffuse_and_decay(&mut self, mask: &ArenaMask, decay: Real) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&decay) {
            return Err(ConfigError::OutOfRange {
                name: "decay",
                value: decay as f64,
                min: 0.0,
                max: 1.0,
            });
        }
        self.check_mask(mask)?;
        let (w, h) = (self.width, self.height);
        let cells = mask.cells();

        // Walls contribute nothing to their neighbours.
        for (v, &hab) in self.values.iter_mut().zip(cells) {
            if !hab {
                *v = 0.0;
            }
        }

        // Horizontal 3-sums with wrap.
        for (row, out) in self
            .values
            .chunks_exact(w)
            .zip(self.row_sums.chunks_exact_mut(w))
        {
            out[0] = row[w - 1] + row[0] + row[1];
            for (o, win) in out[1..w - 1].iter_mut().zip(row.windows(3)) {
                *o = win[0] + win[1] + win[2];
            }
            out[w - 1] = row[w - 2] + row[w - 1] + row[0];
        }

        // Vertical 3-sums; rows beyond the lattice contribute nothing unless
        // it wraps.
        let keep = 1.0 - decay;
        let sums = &self.row_sums;
        let wrap = mask.periodic_y();
        for (y, (out, hab)) in self
            .back
            .chunks_exact_mut(w)
            .zip(cells.chunks_exact(w))
            .enumerate()
        {
            let mid = &sums[y * w..(y + 1) * w];
            let row = |r: usize| &sums[r * w..(r + 1) * w];
            let up = match y {
                0 if wrap => Some(row(h - 1)),
                0 => None,
                _ => Some(row(y - 1)),
            };
            let down = match y + 1 {
                n if n < h => Some(row(n)),
                _ if wrap => Some(row(0)),
                _ => None,
            };
            let finish = |s: Real, hab: bool| if hab { s / 9.0 * keep } else { 0.0 };
            match (up, down) {
                (Some(u), Some(d)) => {
                    for x in 0..w {
                        out[x] = finish(u[x] + mid[x] + d[x], hab[x]);
                    }
                }
                (None, Some(d)) => {
                    for x in 0..w {
                        out[x] = finish(mid[x] + d[x], hab[x]);
                    }
                }
                (Some(u), None) => {
                    for x in 0..w {
                        out[x] = finish(u[x] + mid[x], hab[x]);
                    }
                }
                (None, None) => {
                    for x in 0..w {
                        out[x] = finish(mid[x], hab[x]);
                    }
                }
            }
        }
        std::mem::swap(&mut self.values, &mut self.back);
        Ok(())
    }

    /// Add `amount` to every cell of `region`.
    pub fn add_to_region(&mut self, region: &Region, amount: Real) {
        debug_assert!(amount >= 0.0);
        if amount == 0.0 {
            return;
        }
        for &i in region.indices() {
            self.values[i] += amount;
        }
    }

    /// Add `amount` to every habitable cell.
    pub fn add_to_habitable(&mut self, mask: &ArenaMask, amount: Real) {
        if amount == 0.0 {
            return;
        }
        for (v, &h) in self.values.iter_mut().zip(mask.cells()) {
            if h {
                *v += amount;
            }
        }
    }

    /// Multiply every cell of `region` by `factor`.
    pub fn scale_region(&mut self, region: &Region, factor: Real) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&factor) {
            return Err(ConfigError::OutOfRange {
                name: "factor",
                value: factor as f64,
                min: 0.0,
                max: 1.0,
            });
        }
        for &i in region.indices() {
            self.values[i] *= factor;
        }
        Ok(())
    }
}
