//! Road-network completion driven by sampled pairwise distances.
//!
//! Roads stay well connected after small cuts, so reachability from a source
//! says little. Instead every dangling end of the current network is a
//! terminal, its sources are nearby network pixels that the network itself
//! only reaches by a long detour, and progress is judged by the total
//! on-network distance between sampled points.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::completion::{detect_terminals, stamp_paths, within_radius, Terminal};
use crate::components::bfs_distances;
use crate::error::{Error, Result};
use crate::pipeline::{precompletion, solve_round, LikelihoodProvider, RefineConfig};
use crate::raster::{neighbors, BinaryMask, Pixel};

/// A source must be this many times farther along the network than its
/// Chebyshev distance from the terminal.
pub const DETOUR_FACTOR: usize = 2;

/// Relative slack on the distance total when judging convergence.
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampledPoints {
    pub points: Vec<Pixel>,
    pub seed: u64,
}

/// `n` distinct foreground pixels, uniformly without replacement.
pub fn sample_points(network: &BinaryMask, n: usize, seed: u64) -> Result<SampledPoints> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 points, got {n}")));
    }
    let pixels: Vec<Pixel> = network.pixels().collect();
    if pixels.len() < n {
        return Err(Error::Input(format!(
            "network has {} pixels, cannot sample {n}",
            pixels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = rand::seq::index::sample(&mut rng, pixels.len(), n)
        .into_iter()
        .map(|i| pixels[i])
        .collect();
    Ok(SampledPoints { points, seed })
}

/// Pairwise hop distances between sampled points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistanceSummary {
    /// `None` for disconnected pairs.
    pub pair_distances: Vec<Vec<Option<u64>>>,
    /// Sum over connected unordered pairs.
    pub total: u64,
    /// Disconnected unordered pairs.
    pub disconnected_pairs: usize,
}

impl DistanceSummary {
    fn from_matrix(pair_distances: Vec<Vec<Option<u64>>>) -> Self {
        let mut total = 0;
        let mut disconnected_pairs = 0;
        for (i, row) in pair_distances.iter().enumerate() {
            for d in &row[i + 1..] {
                match d {
                    Some(d) => total += d,
                    None => disconnected_pairs += 1,
                }
            }
        }
        Self {
            pair_distances,
            total,
            disconnected_pairs,
        }
    }

    pub fn len(&self) -> usize {
        self.pair_distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pair_distances.is_empty()
    }

    /// Totals of `self` and `other` over the pairs connected in both.
    pub fn common_totals(&self, other: &DistanceSummary) -> (u64, u64) {
        let mut a = 0;
        let mut b = 0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if let (Some(x), Some(y)) = (self.pair_distances[i][j], other.pair_distances[i][j])
                {
                    a += x;
                    b += y;
                }
            }
        }
        (a, b)
    }
}

/// All-pairs 8-connected hop distances; one BFS per point.
pub fn apsp(network: &BinaryMask, pts: &SampledPoints) -> Result<DistanceSummary> {
    for &p in &pts.points {
        network.shape().check(p)?;
        if !network.get(p) {
            return Err(Error::Input(format!(
                "sample point {p} is not on the network"
            )));
        }
    }
    Ok(apsp_lenient(network, &pts.points))
}

/// Like [`apsp`], but points off the network are simply disconnected.
fn apsp_lenient(network: &BinaryMask, points: &[Pixel]) -> DistanceSummary {
    let shape = network.shape();
    let rows: Vec<Vec<Option<u64>>> = points
        .par_iter()
        .map(|&p| {
            if !network.get(p) {
                return points.iter().map(|&q| (q == p).then_some(0)).collect();
            }
            let dist = bfs_distances(network, p);
            points
                .iter()
                .map(|&q| {
                    let d = dist[shape.index(q)];
                    (d != u32::MAX).then_some(u64::from(d))
                })
                .collect()
        })
        .collect();
    DistanceSummary::from_matrix(rows)
}

/// Network pixels within Euclidean `rho` of `t` whose hop distance from `t`
/// inside the window exceeds [`DETOUR_FACTOR`] times their Chebyshev
/// distance (unreachable counts as infinite).
pub fn detour_sources(network: &BinaryMask, t: Terminal, rho: usize) -> Vec<Pixel> {
    let shape = network.shape();
    let window = shape.window(t.at, rho);
    let cols = window.cols();
    let slot = |p: Pixel| (p.row - window.row_lo) * cols + (p.col - window.col_lo);
    let mut hops = vec![u32::MAX; window.rows() * cols];
    let mut queue = VecDeque::new();
    if network.get(t.at) {
        hops[slot(t.at)] = 0;
        queue.push_back(t.at);
    }
    while let Some(p) = queue.pop_front() {
        let d = hops[slot(p)] + 1;
        for q in neighbors(p, shape) {
            if window.contains(q) && network.get(q) && hops[slot(q)] == u32::MAX {
                hops[slot(q)] = d;
                queue.push_back(q);
            }
        }
    }
    window
        .pixels()
        .filter(|&s| {
            s != t.at
                && network.get(s)
                && within_radius(t.at, s, rho as f64)
                && hops[slot(s)] as u64 > (DETOUR_FACTOR * t.at.chebyshev(s)) as u64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoadTraceEntry {
    pub iteration: usize,
    pub total: u64,
    pub disconnected: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoadComparison {
    pub gt_total: u64,
    pub final_total: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct RoadOutcome {
    pub refined: BinaryMask,
    /// Entry 0 describes the input; entry `i` the state after iteration `i`.
    pub trace: Vec<RoadTraceEntry>,
    pub gt_summary: DistanceSummary,
    pub summaries: Vec<DistanceSummary>,
    pub pixels_added: Vec<usize>,
}

impl RoadOutcome {
    pub fn final_summary(&self) -> &DistanceSummary {
        self.summaries.last().expect("trace is never empty")
    }

    /// Ground-truth vs final totals over pairs connected in both.
    pub fn comparison(&self) -> RoadComparison {
        let (final_total, gt_total) = self.final_summary().common_totals(&self.gt_summary);
        RoadComparison {
            gt_total,
            final_total,
            ratio: if gt_total == 0 {
                1.0
            } else {
                final_total as f64 / gt_total as f64
            },
        }
    }
}

/// Before any repair only an exact match counts; afterwards the total may
/// exceed the reference by [`CONVERGENCE_TOLERANCE`].
fn converged(pred: &DistanceSummary, gt: &DistanceSummary, tolerant: bool) -> bool {
    let (p, g) = pred.common_totals(gt);
    let slack = if tolerant {
        1.0 + CONVERGENCE_TOLERANCE
    } else {
        1.0
    };
    pred.disconnected_pairs <= gt.disconnected_pairs && p as f64 <= slack * g as f64
}

/// Repairs `broken` until the sampled distance total matches `gt`, stalls
/// for two iterations, or `cfg.max_iterations` is reached.
pub fn road_refine<P: LikelihoodProvider + ?Sized>(
    gt: &BinaryMask,
    broken: &BinaryMask,
    provider: &P,
    cfg: &RefineConfig,
    pts: &SampledPoints,
) -> Result<RoadOutcome> {
    cfg.validate()?;
    Error::ensure_same_shape(gt.shape(), broken.shape())?;
    let gt_summary = apsp(gt, pts)?;
    let mut current = broken.clone();
    let first = apsp_lenient(&current, &pts.points);
    let mut trace = vec![RoadTraceEntry {
        iteration: 0,
        total: first.total,
        disconnected: first.disconnected_pairs,
    }];
    let mut summaries = vec![first];
    let mut pixels_added = Vec::new();
    let mut stale = 0;
    for i in 0..cfg.max_iterations {
        let last = summaries.last().expect("nonempty");
        if converged(last, &gt_summary, i > 0) || stale >= 2 {
            break;
        }
        let w = provider.produce(&current, i)?;
        Error::ensure_same_shape(current.shape(), w.shape())?;
        let hc = precompletion(&current, &w, cfg.tau, cfg.dilation_kernel)?;
        let terminals = detect_terminals(&current);
        let net = &current;
        let round = solve_round(terminals, &w, &hc, cfg.rho, cfg.alpha.at(i), |t| {
            detour_sources(net, t, cfg.rho)
        })?;
        let (next, added) = stamp_paths(&current, &round.paths)?;
        current = next;
        let summary = apsp_lenient(&current, &pts.points);
        let (now, before) = summary.common_totals(last);
        let improved = summary.disconnected_pairs < last.disconnected_pairs || now < before;
        stale = if improved { 0 } else { stale + 1 };
        trace.push(RoadTraceEntry {
            iteration: i + 1,
            total: summary.total,
            disconnected: summary.disconnected_pairs,
        });
        summaries.push(summary);
        pixels_added.push(added);
    }
    Ok(RoadOutcome {
        refined: current,
        trace,
        gt_summary,
        summaries,
        pixels_added,
    })
}
