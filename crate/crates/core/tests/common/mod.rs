#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use netrefine::completion::WeightRaster;
use netrefine::{BinaryMask, GridShape, LikelihoodRaster, Pixel};
use rand::Rng;

pub fn random_mask<R: Rng>(rng: &mut R, rows: usize, cols: usize, density: f64) -> BinaryMask {
    let shape = GridShape::new(rows, cols).unwrap();
    let bits = (0..shape.len()).map(|_| rng.gen_bool(density)).collect();
    BinaryMask::from_bits(shape, bits).unwrap()
}

pub fn random_raster<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> LikelihoodRaster {
    let shape = GridShape::new(rows, cols).unwrap();
    let values = (0..shape.len())
        .map(|i| match i % 7 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen::<f32>(),
        })
        .collect();
    LikelihoodRaster::from_values(shape, values).unwrap()
}

pub fn moore(p: Pixel, shape: GridShape) -> Vec<Pixel> {
    let mut out = Vec::new();
    for dr in -1i64..=1 {
        for dc in -1i64..=1 {
            if dr == 0 && dc == 0 {
                continue;
            }
            let (r, c) = (p.row as i64 + dr, p.col as i64 + dc);
            if r >= 0 && c >= 0 && (r as usize) < shape.rows() && (c as usize) < shape.cols() {
                out.push(Pixel::new(r as usize, c as usize));
            }
        }
    }
    out
}

/// Network pixels with a water pixel among their eight neighbours, by a
/// plain scan.
pub fn naive_direct(network: &BinaryMask, water: &BinaryMask) -> BTreeSet<Pixel> {
    network
        .pixels()
        .filter(|&p| moore(p, network.shape()).into_iter().any(|q| water.get(q)))
        .collect()
}

pub fn flood_fill(network: &BinaryMask, seeds: &[Pixel]) -> BTreeSet<Pixel> {
    fn visit(m: &BinaryMask, p: Pixel, seen: &mut BTreeSet<Pixel>) {
        if !m.get(p) || !seen.insert(p) {
            return;
        }
        for q in moore(p, m.shape()) {
            visit(m, q, seen);
        }
    }
    let mut seen = BTreeSet::new();
    for &s in seeds {
        visit(network, s, &mut seen);
    }
    seen
}

/// Node-weighted Dijkstra straight over pixels: a path costs the sum of
/// its pixel weights, endpoints included. Zero weight blocks a pixel.
pub fn node_weighted_costs(x: &WeightRaster, start: Pixel) -> Vec<Option<u64>> {
    let shape = x.shape();
    let mut best = vec![None; shape.len()];
    if x.get(start) == 0 {
        return best;
    }
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((u64::from(x.get(start)), start)));
    while let Some(Reverse((d, p))) = heap.pop() {
        if best[shape.index(p)].is_some() {
            continue;
        }
        best[shape.index(p)] = Some(d);
        for q in moore(p, shape) {
            let w = x.get(q);
            if w > 0 && best[shape.index(q)].is_none() {
                heap.push(Reverse((d + u64::from(w), q)));
            }
        }
    }
    best
}
