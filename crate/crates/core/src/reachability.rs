//! Source reachability over a network mask.
//!
//! A network pixel is *directly connected* when one of its eight neighbors
//! is water (the pixel's own cell does not count). The reachable set is the
//! 8-connected closure of the directly connected pixels within the network;
//! the unreachable set is the remainder, restricted to ground truth.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{neighbors, BinaryMask, Pixel, MOORE_OFFSETS};

/// Network pixels with at least one water pixel among their 8 neighbors.
pub fn directly_connected(network: &BinaryMask, water: &BinaryMask) -> Result<BTreeSet<Pixel>> {
    Ok(directly_connected_mask(network, water)?.pixels().collect())
}

pub(crate) fn directly_connected_mask(
    network: &BinaryMask,
    water: &BinaryMask,
) -> Result<BinaryMask> {
    Error::ensure_same_shape(network.shape(), water.shape())?;
    let shape = network.shape();
    let mut out = BinaryMask::zeros(shape);
    // Scatter from each water pixel: equivalent to convolving the water mask
    // with the zero-center 3x3 kernel and testing > 0.
    for w in water.pixels() {
        for &(dr, dc) in &MOORE_OFFSETS {
            if let Some(q) = shape.offset(w, dr, dc) {
                if network.get(q) {
                    out.set(q, true);
                }
            }
        }
    }
    Ok(out)
}

/// Every network pixel 8-connected to some seed, seeds included.
pub fn reachable_closure(network: &BinaryMask, seeds: &[Pixel]) -> Result<BTreeSet<Pixel>> {
    for &s in seeds {
        network.shape().check(s)?;
        if !network.get(s) {
            return Err(Error::Input(format!("seed {s} is not a network pixel")));
        }
    }
    let seed_mask = BinaryMask::from_pixels(network.shape(), seeds.iter().copied())?;
    Ok(closure_mask(network, &seed_mask).pixels().collect())
}

/// Breadth-first closure of `seeds` (a subset of `network`), FIFO from a
/// row-major seed order.
pub(crate) fn closure_mask(network: &BinaryMask, seeds: &BinaryMask) -> BinaryMask {
    let shape = network.shape();
    let mut reached = BinaryMask::zeros(shape);
    let mut queue: VecDeque<Pixel> = VecDeque::new();
    for s in seeds.pixels() {
        reached.set(s, true);
        queue.push_back(s);
    }
    while let Some(p) = queue.pop_front() {
        for q in neighbors(p, shape) {
            if network.get(q) && !reached.get(q) {
                reached.set(q, true);
                queue.push_back(q);
            }
        }
    }
    reached
}

/// Reachable (R), unreachable (U) and directly connected (C) pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityPartition {
    pub reachable: BinaryMask,
    pub unreachable: BinaryMask,
    pub directly_connected: BinaryMask,
    /// Unreachable network pixels before restriction to ground truth.
    pub unreachable_unrestricted: usize,
}

impl ReachabilityPartition {
    pub fn summary(&self) -> ReachabilityReport {
        let reachable = self.reachable.count_ones();
        let unreachable = self.unreachable.count_ones();
        let total = reachable + unreachable;
        ReachabilityReport {
            reachable,
            unreachable,
            directly_connected: self.directly_connected.count_ones(),
            unreachable_fraction: if total == 0 {
                0.0
            } else {
                unreachable as f64 / total as f64
            },
        }
    }

    /// `|U| / (|R| + |U|)`, 0 for an empty network.
    pub fn unreachable_fraction(&self) -> f64 {
        self.summary().unreachable_fraction
    }
}

/// Counts emitted by the `analyze` report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReachabilityReport {
    pub reachable: usize,
    pub unreachable: usize,
    pub directly_connected: usize,
    pub unreachable_fraction: f64,
}

/// Splits `network` into reachable and unreachable pixels; unreachable
/// pixels outside `ground_truth` are dropped.
pub fn partition(
    network: &BinaryMask,
    water: &BinaryMask,
    ground_truth: &BinaryMask,
) -> Result<ReachabilityPartition> {
    Error::ensure_same_shape(network.shape(), ground_truth.shape())?;
    let direct = directly_connected_mask(network, water)?;
    let reachable = closure_mask(network, &direct);
    let unrestricted = network.difference(&reachable)?;
    let unreachable = unrestricted.intersection(ground_truth)?;
    Ok(ReachabilityPartition {
        unreachable_unrestricted: unrestricted.count_ones(),
        reachable,
        unreachable,
        directly_connected: direct,
    })
}
