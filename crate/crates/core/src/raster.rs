//! Dense row-major rasters and grid addressing.
//!
//! Every raster carries a [`GridShape`]; operations combining rasters reject
//! mismatched shapes. Pixels are addressed `(row, col)`, 0-based, and the
//! derived ordering on [`Pixel`] is the row-major scan order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    rows: usize,
    cols: usize,
}

impl GridShape {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Parameter(format!(
                "grid dimensions must be positive, got {rows}x{cols}"
            )));
        }
        Ok(Self { rows, cols })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    /// Always false; a shape has at least one cell.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains(&self, p: Pixel) -> bool {
        p.row < self.rows && p.col < self.cols
    }

    #[inline]
    pub fn index(&self, p: Pixel) -> usize {
        debug_assert!(self.contains(p));
        p.row * self.cols + p.col
    }

    #[inline]
    pub fn pixel(&self, index: usize) -> Pixel {
        Pixel::new(index / self.cols, index % self.cols)
    }

    pub fn check(&self, p: Pixel) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                pixel: p,
                shape: *self,
            })
        }
    }

    /// In-bounds pixel at `p + (dr, dc)`, if any.
    #[inline]
    pub fn offset(&self, p: Pixel, dr: isize, dc: isize) -> Option<Pixel> {
        let r = p.row.checked_add_signed(dr)?;
        let c = p.col.checked_add_signed(dc)?;
        (r < self.rows && c < self.cols).then_some(Pixel::new(r, c))
    }

    /// Inclusive row/col bounds of the square window of `radius` around `p`,
    /// clipped to the grid.
    pub fn window(&self, p: Pixel, radius: usize) -> Window {
        Window {
            row_lo: p.row.saturating_sub(radius),
            row_hi: (p.row + radius).min(self.rows - 1),
            col_lo: p.col.saturating_sub(radius),
            col_hi: (p.col + radius).min(self.cols - 1),
        }
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// Clipped rectangular window, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub row_lo: usize,
    pub row_hi: usize,
    pub col_lo: usize,
    pub col_hi: usize,
}

impl Window {
    #[inline]
    pub fn contains(&self, p: Pixel) -> bool {
        (self.row_lo..=self.row_hi).contains(&p.row) && (self.col_lo..=self.col_hi).contains(&p.col)
    }

    pub fn rows(&self) -> usize {
        self.row_hi - self.row_lo + 1
    }

    pub fn cols(&self) -> usize {
        self.col_hi - self.col_lo + 1
    }

    /// Pixels of the window in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        (self.row_lo..=self.row_hi)
            .flat_map(move |r| (self.col_lo..=self.col_hi).map(move |c| Pixel::new(r, c)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
}

impl Pixel {
    #[inline]
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    #[inline]
    pub fn chebyshev(&self, other: Pixel) -> usize {
        self.row
            .abs_diff(other.row)
            .max(self.col.abs_diff(other.col))
    }

    #[inline]
    pub fn squared_distance(&self, other: Pixel) -> u64 {
        let dr = self.row.abs_diff(other.row) as u64;
        let dc = self.col.abs_diff(other.col) as u64;
        dr * dr + dc * dc
    }

    #[inline]
    pub fn is_moore_adjacent(&self, other: Pixel) -> bool {
        self.chebyshev(other) == 1
    }
}

impl fmt::Display for Pixel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Offsets of the 3x3 window minus its center, in row-major order.
pub const MOORE_OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// In-bounds 8-neighbors of `p`, row-major order.
pub fn moore_neighbors(p: Pixel, shape: GridShape) -> Result<Vec<Pixel>> {
    shape.check(p)?;
    Ok(neighbors(p, shape).collect())
}

/// Unchecked iterator form of [`moore_neighbors`] for hot loops.
#[inline]
pub(crate) fn neighbors(p: Pixel, shape: GridShape) -> impl Iterator<Item = Pixel> {
    MOORE_OFFSETS
        .iter()
        .filter_map(move |&(dr, dc)| shape.offset(p, dr, dc))
}

/// 2-D 0/1 raster.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    shape: GridShape,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn zeros(shape: GridShape) -> Self {
        Self {
            shape,
            bits: vec![false; shape.len()],
        }
    }

    pub fn ones(shape: GridShape) -> Self {
        Self {
            shape,
            bits: vec![true; shape.len()],
        }
    }

    pub fn from_bits(shape: GridShape, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != shape.len() {
            return Err(Error::Input(format!(
                "{} cells supplied for a {shape} mask",
                bits.len()
            )));
        }
        Ok(Self { shape, bits })
    }

    pub fn from_pixels<I>(shape: GridShape, pixels: I) -> Result<Self>
    where
        I: IntoIterator<Item = Pixel>,
    {
        let mut mask = Self::zeros(shape);
        for p in pixels {
            shape.check(p)?;
            mask.set(p, true);
        }
        Ok(mask)
    }

    /// Parses rows of `.`/`#` (or `0`/`1`); used heavily by tests.
    pub fn from_ascii(art: &str) -> Result<Self> {
        let lines: Vec<&str> = art
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let rows = lines.len();
        let cols = lines.first().map_or(0, |l| l.chars().count());
        let shape = GridShape::new(rows, cols)?;
        let mut bits = Vec::with_capacity(shape.len());
        for line in &lines {
            if line.chars().count() != cols {
                return Err(Error::Input("ragged ascii mask".into()));
            }
            for ch in line.chars() {
                bits.push(match ch {
                    '#' | '1' => true,
                    '.' | '0' => false,
                    other => return Err(Error::Input(format!("unexpected mask glyph {other:?}"))),
                });
            }
        }
        Self::from_bits(shape, bits)
    }

    #[inline]
    pub fn shape(&self) -> GridShape {
        self.shape
    }

    #[inline]
    pub fn get(&self, p: Pixel) -> bool {
        self.bits[self.shape.index(p)]
    }

    /// False for out-of-bounds offsets, matching zero padding.
    #[inline]
    pub fn get_offset(&self, p: Pixel, dr: isize, dc: isize) -> bool {
        self.shape.offset(p, dr, dc).is_some_and(|q| self.get(q))
    }

    #[inline]
    pub fn set(&mut self, p: Pixel, value: bool) {
        let i = self.shape.index(p);
        self.bits[i] = value;
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Foreground pixels in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        let shape = self.shape;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| shape.pixel(i))
    }

    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            shape: self.shape,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> Result<bool> {
        Error::ensure_same_shape(self.shape, other.shape)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b))
    }

    /// In-place OR; returns the number of bits newly set.
    pub fn or_assign(&mut self, other: &BinaryMask) -> Result<usize> {
        Error::ensure_same_shape(self.shape, other.shape)?;
        let mut added = 0;
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            if b && !*a {
                *a = true;
                added += 1;
            }
        }
        Ok(added)
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        Error::ensure_same_shape(self.shape, other.shape)?;
        Ok(BinaryMask {
            shape: self.shape,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMask {} [", self.shape)?;
        for row in self.bits.chunks(self.shape.cols) {
            let line: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
            writeln!(f, "  {line}")?;
        }
        write!(f, "]")
    }
}

/// Per-pixel confidence in `[0, 1]`, stored as `f32` to match PFM.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodRaster {
    shape: GridShape,
    values: Vec<f32>,
}

impl LikelihoodRaster {
    pub fn zeros(shape: GridShape) -> Self {
        Self {
            shape,
            values: vec![0.0; shape.len()],
        }
    }

    pub fn filled(shape: GridShape, value: f32) -> Result<Self> {
        check_likelihood(value)?;
        Ok(Self {
            shape,
            values: vec![value; shape.len()],
        })
    }

    pub fn from_values(shape: GridShape, values: Vec<f32>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::Input(format!(
                "{} values supplied for a {shape} raster",
                values.len()
            )));
        }
        for &v in &values {
            check_likelihood(v)?;
        }
        Ok(Self { shape, values })
    }

    /// `value` on foreground pixels of `mask`, 0 elsewhere.
    pub fn from_mask(mask: &BinaryMask, value: f32) -> Result<Self> {
        check_likelihood(value)?;
        Ok(Self {
            shape: mask.shape(),
            values: mask
                .bits()
                .iter()
                .map(|&b| if b { value } else { 0.0 })
                .collect(),
        })
    }

    #[inline]
    pub fn shape(&self) -> GridShape {
        self.shape
    }

    #[inline]
    pub fn get(&self, p: Pixel) -> f32 {
        self.values[self.shape.index(p)]
    }

    pub fn set(&mut self, p: Pixel, value: f32) -> Result<()> {
        check_likelihood(value)?;
        let i = self.shape.index(p);
        self.values[i] = value;
        Ok(())
    }

    #[inline]
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Pixels with likelihood `>= tau`.
    pub fn threshold(&self, tau: f32) -> BinaryMask {
        let bits = self.values.iter().map(|&v| v >= tau).collect();
        BinaryMask::from_bits(self.shape, bits).expect("shape preserved")
    }
}

fn check_likelihood(v: f32) -> Result<()> {
    if v.is_nan() || !(0.0..=1.0).contains(&v) {
        return Err(Error::Input(format!("likelihood {v} outside [0, 1]")));
    }
    Ok(())
}
