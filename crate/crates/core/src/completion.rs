//! Network-completion instances and their solver.
//!
//! For every unreachable terminal, a confidence-weighted local graph is cut
//! out of the weight raster around it, node weights are moved onto edges by
//! splitting each pixel into an in/out vertex pair, and Dijkstra finds the
//! cheapest route to any paired source. Winning routes are OR-ed into the
//! network.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{
    neighbors, BinaryMask, GridShape, LikelihoodRaster, Pixel, Window, MOORE_OFFSETS,
};

/// A dangling unreachable pixel eligible for completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Terminal {
    pub at: Pixel,
}

/// Pixels of `unreachable` with at most one 8-neighbor in `unreachable`.
pub fn detect_terminals(unreachable: &BinaryMask) -> Vec<Terminal> {
    let shape = unreachable.shape();
    unreachable
        .pixels()
        .filter(|&p| {
            neighbors(p, shape)
                .filter(|&q| unreachable.get(q))
                .take(2)
                .count()
                <= 1
        })
        .map(|at| Terminal { at })
        .collect()
}

/// Water pixels with fewer than eight water neighbors.
pub fn water_edge_points(water: &BinaryMask) -> BinaryMask {
    let shape = water.shape();
    let mut edges = BinaryMask::zeros(shape);
    for p in water.pixels() {
        let inner = MOORE_OFFSETS
            .iter()
            .filter(|&&(dr, dc)| water.get_offset(p, dr, dc))
            .count();
        if inner < 8 {
            edges.set(p, true);
        }
    }
    edges
}

/// Candidates within Euclidean distance `rho` of the terminal (inclusive).
pub fn pair_sources(t: Terminal, candidates: &BinaryMask, rho: f64) -> Vec<Pixel> {
    if rho.is_nan() || rho < 0.0 {
        return Vec::new();
    }
    let shape = candidates.shape();
    if !shape.contains(t.at) {
        return Vec::new();
    }
    let radius = rho.floor() as usize;
    shape
        .window(t.at, radius)
        .pixels()
        .filter(|&p| candidates.get(p) && within_radius(t.at, p, rho))
        .collect()
}

#[inline]
pub(crate) fn within_radius(a: Pixel, b: Pixel, rho: f64) -> bool {
    // squared distances are exact integers; compare without a square root
    (a.squared_distance(b) as f64) <= rho * rho
}

/// Integer traversal costs; 0 marks a pixel that paths may not use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightRaster {
    shape: GridShape,
    weights: Vec<u32>,
}

impl WeightRaster {
    pub fn zeros(shape: GridShape) -> Self {
        Self {
            shape,
            weights: vec![0; shape.len()],
        }
    }

    pub fn from_weights(shape: GridShape, weights: Vec<u32>) -> Result<Self> {
        if weights.len() != shape.len() {
            return Err(Error::Input(format!(
                "{} weights supplied for a {shape} raster",
                weights.len()
            )));
        }
        Ok(Self { shape, weights })
    }

    #[inline]
    pub fn shape(&self) -> GridShape {
        self.shape
    }

    #[inline]
    pub fn get(&self, p: Pixel) -> u32 {
        self.weights[self.shape.index(p)]
    }

    #[inline]
    pub fn set(&mut self, p: Pixel, w: u32) {
        let i = self.shape.index(p);
        self.weights[i] = w;
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn traversable(&self) -> BinaryMask {
        BinaryMask::from_bits(self.shape, self.weights.iter().map(|&w| w > 0).collect())
            .expect("shape preserved")
    }
}

/// `floor(1 / w)` in single precision, saturating at `u32::MAX`.
///
/// Dividing in `f32` rounds the quotient correctly for the stored value, so
/// decimal likelihoods like 0.2 or 0.1 quantize to 5 and 10.
#[inline]
pub fn quantize_weight(w: f32) -> u32 {
    debug_assert!(w > 0.0);
    let q = (1.0f32 / w).floor();
    if q >= u32::MAX as f32 {
        u32::MAX
    } else {
        q as u32
    }
}

/// Shared weight raster for one iteration.
///
/// Pre-completion pixels start at weight 1. Around every terminal, any pixel
/// of the square window of half-width `rho` other than the terminal itself
/// with likelihood above `alpha` and no weight yet gets `floor(1 / w)`.
pub fn build_weight_raster(
    terminals: &[Terminal],
    w: &LikelihoodRaster,
    precompletion: &BinaryMask,
    rho: usize,
    alpha: f32,
) -> Result<WeightRaster> {
    Error::ensure_same_shape(w.shape(), precompletion.shape())?;
    if alpha.is_nan() || !(0.0..1.0).contains(&alpha) {
        return Err(Error::Parameter(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    let shape = w.shape();
    let mut x = WeightRaster::from_weights(
        shape,
        precompletion.bits().iter().map(|&b| b as u32).collect(),
    )?;
    for t in terminals {
        shape.check(t.at)?;
        for n in shape.window(t.at, rho).pixels() {
            if n == t.at {
                continue;
            }
            let i = shape.index(n);
            let v = w.values()[i];
            if v > alpha && x.weights[i] == 0 {
                x.weights[i] = quantize_weight(v);
            }
        }
    }
    Ok(x)
}

/// Directed edge of the split graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub to: u32,
    pub weight: u64,
}

/// Node-split, edge-weighted graph over the traversable pixels of the
/// window around a terminal.
///
/// Pixel `k` owns vertices `2k` (entry) and `2k + 1` (exit) joined by an
/// edge carrying the pixel weight; exit-to-entry edges between 8-neighbors
/// are free. A cheapest entry(a) -> exit(b) route therefore costs the sum of
/// pixel weights along the pixel path, both endpoints included.
#[derive(Debug, Clone)]
pub struct LocalGraph {
    window: Window,
    terminal: Pixel,
    pixels: Vec<Pixel>,
    weights: Vec<u64>,
    /// pixel index within the window -> node index, `u32::MAX` if absent
    slot: Vec<u32>,
    adjacency: Vec<Vec<Edge>>,
}

impl LocalGraph {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn terminal(&self) -> Pixel {
        self.terminal
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edges(&self, vertex: u32) -> &[Edge] {
        &self.adjacency[vertex as usize]
    }

    pub fn pixel_of(&self, vertex: u32) -> Pixel {
        self.pixels[(vertex / 2) as usize]
    }

    fn node(&self, p: Pixel) -> Option<u32> {
        if !self.window.contains(p) {
            return None;
        }
        let k = self.slot[self.slot_index(p)];
        (k != u32::MAX).then_some(k)
    }

    /// Entry vertex of `p`, if `p` is a node.
    pub fn entry(&self, p: Pixel) -> Option<u32> {
        self.node(p).map(|k| 2 * k)
    }

    /// Exit vertex of `p`, if `p` is a node.
    pub fn exit(&self, p: Pixel) -> Option<u32> {
        self.node(p).map(|k| 2 * k + 1)
    }

    fn slot_index(&self, p: Pixel) -> usize {
        (p.row - self.window.row_lo) * self.window.cols() + (p.col - self.window.col_lo)
    }

    /// Single-source Dijkstra from `start`, ordered by `(cost, pixels)` so
    /// equal-cost routes prefer fewer pixels.
    pub fn shortest_paths(&self, start: u32) -> ShortestPaths {
        let n = self.adjacency.len();
        let mut best = vec![(u64::MAX, u32::MAX); n];
        let mut pred = vec![u32::MAX; n];
        let mut heap = BinaryHeap::new();
        best[start as usize] = (0, 0);
        heap.push(Reverse((0u64, 0u32, start)));
        while let Some(Reverse((cost, hops, v))) = heap.pop() {
            if (cost, hops) > best[v as usize] {
                continue;
            }
            for e in &self.adjacency[v as usize] {
                // entry->exit edges are the only ones that add a pixel
                let step = u32::from(v % 2 == 0 && e.to == v + 1);
                let cand = (cost + e.weight, hops + step);
                if cand < best[e.to as usize] {
                    best[e.to as usize] = cand;
                    pred[e.to as usize] = v;
                    heap.push(Reverse((cand.0, cand.1, e.to)));
                }
            }
        }
        ShortestPaths { best, pred }
    }
}

/// Dijkstra output over a [`LocalGraph`].
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    best: Vec<(u64, u32)>,
    pred: Vec<u32>,
}

impl ShortestPaths {
    pub fn cost(&self, vertex: u32) -> Option<u64> {
        let (c, _) = self.best[vertex as usize];
        (c != u64::MAX).then_some(c)
    }

    fn key(&self, vertex: u32) -> Option<(u64, u32)> {
        let k = self.best[vertex as usize];
        (k.0 != u64::MAX).then_some(k)
    }

    /// Vertex chain ending at `vertex`, start first.
    fn chain(&self, vertex: u32) -> Vec<u32> {
        let mut out = vec![vertex];
        let mut v = vertex;
        while self.pred[v as usize] != u32::MAX {
            v = self.pred[v as usize];
            out.push(v);
        }
        out.reverse();
        out
    }
}

/// Builds the split graph for the window of half-width `rho` around `t`.
pub fn build_local_graph(x_r: &WeightRaster, t: Terminal, rho: usize) -> Result<LocalGraph> {
    let shape = x_r.shape();
    shape.check(t.at)?;
    if x_r.get(t.at) == 0 {
        return Err(Error::Input(format!(
            "terminal {} is not traversable",
            t.at
        )));
    }
    let window = shape.window(t.at, rho);
    let mut slot = vec![u32::MAX; window.rows() * window.cols()];
    let mut pixels = Vec::new();
    let mut weights = Vec::new();
    for (k, p) in window.pixels().enumerate() {
        let w = x_r.get(p);
        if w > 0 {
            slot[k] = pixels.len() as u32;
            pixels.push(p);
            weights.push(u64::from(w));
        }
    }
    let mut graph = LocalGraph {
        window,
        terminal: t.at,
        pixels,
        weights,
        slot,
        adjacency: Vec::new(),
    };
    let mut adjacency = vec![Vec::new(); graph.pixels.len() * 2];
    for (k, &p) in graph.pixels.iter().enumerate() {
        let entry = 2 * k as u32;
        adjacency[entry as usize].push(Edge {
            to: entry + 1,
            weight: graph.weights[k],
        });
        for &(dr, dc) in &MOORE_OFFSETS {
            // the reverse free edge is added when the neighbor is visited
            if let Some(q) = shape.offset(p, dr, dc).and_then(|q| graph.node(q)) {
                adjacency[(entry + 1) as usize].push(Edge {
                    to: 2 * q,
                    weight: 0,
                });
            }
        }
    }
    graph.adjacency = adjacency;
    Ok(graph)
}

/// Terminal, paired sources and local graph.
#[derive(Debug, Clone)]
pub struct CompletionInstance {
    pub terminal: Terminal,
    pub sources: Vec<Pixel>,
    pub local_graph: LocalGraph,
}

/// Pixel route from a terminal to a source and its summed weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompletionPath {
    pub pixels: Vec<Pixel>,
    pub cost: u64,
}

impl CompletionPath {
    pub fn source(&self) -> Pixel {
        *self.pixels.last().expect("paths are nonempty")
    }
}

/// Cheapest route from the terminal to any source, ties broken by fewer
/// pixels and then by the smaller source pixel. `None` when no source is
/// reachable inside the local graph.
pub fn solve_instance(inst: &CompletionInstance) -> Option<CompletionPath> {
    let g = &inst.local_graph;
    let start = g.entry(inst.terminal.at)?;
    let sp = g.shortest_paths(start);
    let (_, _, exit) = inst
        .sources
        .iter()
        .filter_map(|&s| {
            let exit = g.exit(s)?;
            let (cost, hops) = sp.key(exit)?;
            Some((cost, hops, s, exit))
        })
        .min_by_key(|&(cost, hops, s, _)| (cost, hops, s))
        .map(|(cost, hops, _, exit)| (cost, hops, exit))?;
    let pixels: Vec<Pixel> = sp
        .chain(exit)
        .into_iter()
        .filter(|v| v % 2 == 1)
        .map(|v| g.pixel_of(v))
        .collect();
    Some(CompletionPath {
        cost: sp.cost(exit)?,
        pixels,
    })
}

/// ORs every path into `network`; returns the result and the number of
/// newly set pixels.
pub fn stamp_paths(network: &BinaryMask, paths: &[CompletionPath]) -> Result<(BinaryMask, usize)> {
    let mut out = network.clone();
    let mut added = 0;
    for path in paths {
        for &p in &path.pixels {
            network.shape().check(p)?;
            if !out.get(p) {
                out.set(p, true);
                added += 1;
            }
        }
    }
    Ok((out, added))
}
