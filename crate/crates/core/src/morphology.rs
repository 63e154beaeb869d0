//! Binary morphology with a square structuring element.
//!
//! Out-of-bounds cells read as background for every operator here.

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GridShape, Pixel};

/// Population count of a mask.
pub fn count_ones(mask: &BinaryMask) -> usize {
    mask.count_ones()
}

fn half_width(kernel_size: usize) -> Result<usize> {
    if kernel_size == 0 || kernel_size.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "kernel size must be odd and positive, got {kernel_size}"
        )));
    }
    Ok(kernel_size / 2)
}

/// Dilation by a `kernel_size` x `kernel_size` block of ones.
pub fn dilate(mask: &BinaryMask, kernel_size: usize) -> Result<BinaryMask> {
    let radius = half_width(kernel_size)?;
    if radius == 0 {
        return Ok(mask.clone());
    }
    let shape = mask.shape();
    let rows = sliding_any(mask.bits(), shape, radius, Axis::Row);
    let both = sliding_any(&rows, shape, radius, Axis::Col);
    BinaryMask::from_bits(shape, both)
}

/// Erosion by a `kernel_size` x `kernel_size` block of ones.
pub fn erode(mask: &BinaryMask, kernel_size: usize) -> Result<BinaryMask> {
    let radius = half_width(kernel_size)?;
    if radius == 0 {
        return Ok(mask.clone());
    }
    // erode(m) = !dilate(!m) with the padding treated as background of m,
    // i.e. foreground of !m.
    let shape = mask.shape();
    let inverted: Vec<bool> = mask.bits().iter().map(|&b| !b).collect();
    let rows = sliding_any_padded(&inverted, shape, radius, Axis::Row, true);
    let both = sliding_any_padded(&rows, shape, radius, Axis::Col, true);
    BinaryMask::from_bits(shape, both.into_iter().map(|b| !b).collect())
}

#[derive(Clone, Copy)]
enum Axis {
    Row,
    Col,
}

fn sliding_any(bits: &[bool], shape: GridShape, radius: usize, axis: Axis) -> Vec<bool> {
    sliding_any_padded(bits, shape, radius, axis, false)
}

/// 1-D running OR of width `2 * radius + 1` along `axis`; cells beyond the
/// border take the value `pad`.
fn sliding_any_padded(
    bits: &[bool],
    shape: GridShape,
    radius: usize,
    axis: Axis,
    pad: bool,
) -> Vec<bool> {
    let (lines, len) = match axis {
        Axis::Row => (shape.rows(), shape.cols()),
        Axis::Col => (shape.cols(), shape.rows()),
    };
    let at = |line: usize, k: usize| match axis {
        Axis::Row => line * shape.cols() + k,
        Axis::Col => k * shape.cols() + line,
    };
    let mut out = vec![false; bits.len()];
    for line in 0..lines {
        // count of set cells currently inside the window
        let mut count = 0usize;
        for k in 0..radius.min(len) {
            count += bits[at(line, k)] as usize;
        }
        for k in 0..len {
            let enter = k + radius;
            if enter < len {
                count += bits[at(line, enter)] as usize;
            }
            if k > radius {
                count -= bits[at(line, k - radius - 1)] as usize;
            }
            let clipped = k < radius || k + radius >= len;
            out[at(line, k)] = count > 0 || (pad && clipped);
        }
    }
    out
}

/// Zhang-Suen thinning to a unit-width 8-connected skeleton.
///
/// Each sub-iteration first collects the classic Zhang-Suen candidates
/// against the unmodified image, then deletes them in scan order, skipping
/// any candidate that is no longer a simple end-preserving point in the
/// partially updated image. That guard keeps the number of 8-connected
/// components fixed (plain Zhang-Suen erases isolated 2x2 squares). Simple
/// points left inside 2x2 blocks are then removed the same way, so the
/// result has unit width.
pub fn thin(mask: &BinaryMask) -> BinaryMask {
    thin_keeping(mask, None)
}

/// [`thin`] that never deletes pixels set in `keep`.
pub(crate) fn thin_keeping(mask: &BinaryMask, keep: Option<&BinaryMask>) -> BinaryMask {
    let mut img = mask.clone();
    loop {
        if zhang_suen_round(&mut img, keep) {
            continue;
        }
        if !clear_blocks(&mut img, keep) {
            break;
        }
    }
    img
}

fn remove_if_simple(img: &mut BinaryMask, p: Pixel, keep: Option<&BinaryMask>) -> bool {
    if keep.is_some_and(|k| k.get(p)) {
        return false;
    }
    let ring = ring(img, p);
    let fg = ring.iter().filter(|&&b| b).count();
    if fg >= 2 && crossing_number(&ring) == 1 {
        img.set(p, false);
        true
    } else {
        false
    }
}

fn zhang_suen_round(img: &mut BinaryMask, keep: Option<&BinaryMask>) -> bool {
    let mut changed = false;
    for first_pass in [true, false] {
        let candidates: Vec<Pixel> = img
            .pixels()
            .filter(|&p| zhang_suen_deletable(img, p, first_pass))
            .collect();
        for p in candidates {
            changed |= remove_if_simple(img, p, keep);
        }
    }
    changed
}

fn clear_blocks(img: &mut BinaryMask, keep: Option<&BinaryMask>) -> bool {
    let blocky: Vec<Pixel> = img.pixels().filter(|&p| in_full_block(img, p)).collect();
    let mut changed = false;
    for p in blocky {
        if in_full_block(img, p) {
            changed |= remove_if_simple(img, p, keep);
        }
    }
    changed
}

fn in_full_block(img: &BinaryMask, p: Pixel) -> bool {
    [(-1, -1), (-1, 1), (1, -1), (1, 1)]
        .iter()
        .any(|&(dr, dc)| {
            img.get_offset(p, dr, 0) && img.get_offset(p, 0, dc) && img.get_offset(p, dr, dc)
        })
}

/// Neighbors P2..P9 clockwise from north.
fn ring(img: &BinaryMask, p: Pixel) -> [bool; 8] {
    const CLOCKWISE: [(isize, isize); 8] = [
        (-1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
        (1, 0),
        (1, -1),
        (0, -1),
        (-1, -1),
    ];
    CLOCKWISE.map(|(dr, dc)| img.get_offset(p, dr, dc))
}

/// Number of 0->1 transitions around the closed ring.
fn transitions(ring: &[bool; 8]) -> usize {
    (0..8).filter(|&i| !ring[i] && ring[(i + 1) % 8]).count()
}

/// 8-connectivity crossing number (Yokoi); 1 means deleting the center
/// preserves local topology.
fn crossing_number(ring: &[bool; 8]) -> usize {
    // ring index: 0=N 1=NE 2=E 3=SE 4=S 5=SW 6=W 7=NW.
    // Yokoi sums over the 4-neighbors k with the two following ring cells.
    let x = |i: usize| !ring[i % 8] as usize;
    [0usize, 2, 4, 6]
        .iter()
        .map(|&k| x(k) - x(k) * x(k + 1) * x(k + 2))
        .sum()
}

fn zhang_suen_deletable(img: &BinaryMask, p: Pixel, first_pass: bool) -> bool {
    let n = ring(img, p);
    let b = n.iter().filter(|&&v| v).count();
    if !(2..=6).contains(&b) || transitions(&n) != 1 {
        return false;
    }
    let (p2, p4, p6, p8) = (n[0], n[2], n[4], n[6]);
    if first_pass {
        !(p2 && p4 && p6) && !(p4 && p6 && p8)
    } else {
        !(p2 && p4 && p8) && !(p2 && p6 && p8)
    }
}
