//! Seeded synthetic networks, gap injection and oracle likelihood
//! providers for closed-loop checks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphology::{dilate, thin_keeping};
use crate::pipeline::LikelihoodProvider;
use crate::raster::{neighbors, BinaryMask, GridShape, LikelihoodRaster, Pixel};
use crate::reachability::directly_connected_mask;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub shape: GridShape,
    pub seed: u64,
    pub trunk_count: usize,
    pub branch_depth: usize,
    pub water_blobs: usize,
}

/// Pixels of the digital line from `a` to `b`, both ends included.
pub fn bresenham(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut r, mut c) = a;
    let dr = (b.0 - a.0).abs();
    let dc = -(b.1 - a.1).abs();
    let sr = if a.0 < b.0 { 1 } else { -1 };
    let sc = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dr + dc;
    let mut out = Vec::with_capacity((dr - dc) as usize + 1);
    loop {
        out.push((r, c));
        if (r, c) == b {
            return out;
        }
        let e2 = 2 * err;
        if e2 >= dc {
            err += dc;
            r += sr;
        }
        if e2 <= dr {
            err += dr;
            c += sc;
        }
    }
}

struct Canvas {
    shape: GridShape,
    network: BinaryMask,
    water: BinaryMask,
}

impl Canvas {
    fn inside(&self, (r, c): (i64, i64)) -> Option<Pixel> {
        // keep a one-pixel frame free so every drawn pixel has 8 neighbors
        let ok = r >= 1
            && c >= 1
            && (r as usize) + 1 < self.shape.rows()
            && (c as usize) + 1 < self.shape.cols();
        ok.then(|| Pixel::new(r as usize, c as usize))
    }

    /// Draws a wandering polyline from `start`; returns the drawn pixels in
    /// order. Stops at the frame or before entering water.
    fn walk(
        &mut self,
        rng: &mut ChaCha8Rng,
        start: Pixel,
        mut heading: f64,
        length: usize,
    ) -> Vec<Pixel> {
        let mut drawn = vec![start];
        self.network.set(start, true);
        let mut at = (start.row as i64, start.col as i64);
        while drawn.len() < length {
            heading += rng.gen_range(-0.45..0.45);
            let step = rng.gen_range(8.0..18.0);
            let next = (
                at.0 + (step * heading.sin()).round() as i64,
                at.1 + (step * heading.cos()).round() as i64,
            );
            if next == at {
                continue;
            }
            for q in bresenham(at, next).into_iter().skip(1) {
                let Some(p) = self.inside(q) else {
                    return drawn;
                };
                if self.water.get(p) || drawn.len() >= length {
                    return drawn;
                }
                self.network.set(p, true);
                drawn.push(p);
            }
            at = next;
        }
        drawn
    }

    fn branch(
        &mut self,
        rng: &mut ChaCha8Rng,
        parent: &[Pixel],
        heading: f64,
        length: usize,
        depth: usize,
    ) {
        if depth == 0 || parent.len() < 12 {
            return;
        }
        let count = rng.gen_range(1..=2);
        for _ in 0..count {
            let at = rng.gen_range(parent.len() / 4..parent.len() - 4);
            let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let h = heading + side * rng.gen_range(0.7..1.2);
            let child_len = (length as f64 * rng.gen_range(0.4..0.7)) as usize;
            let child = self.walk(rng, parent[at], h, child_len.max(6));
            self.branch(rng, &child, h, child_len, depth - 1);
        }
    }
}

/// Branching 1-px network whose trunks all start next to a water blob.
pub fn generate_network(cfg: &SynthConfig) -> Result<(BinaryMask, BinaryMask)> {
    let shape = cfg.shape;
    if cfg.trunk_count > 0 && cfg.water_blobs == 0 {
        return Err(Error::Parameter(
            "trunks need at least one water blob".into(),
        ));
    }
    let side = shape.rows().min(shape.cols());
    let radius = (side / 64).clamp(2, 8);
    if side < 4 * radius + 8 {
        return Err(Error::Parameter(format!(
            "{shape} grid too small for synthesis"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut canvas = Canvas {
        shape,
        network: BinaryMask::zeros(shape),
        water: BinaryMask::zeros(shape),
    };
    let margin = radius + 3;
    let mut centers = Vec::with_capacity(cfg.water_blobs);
    for _ in 0..cfg.water_blobs {
        let center = Pixel::new(
            rng.gen_range(margin..shape.rows() - margin),
            rng.gen_range(margin..shape.cols() - margin),
        );
        let r2 = (radius * radius) as u64;
        for p in shape.window(center, radius).pixels() {
            if p.squared_distance(center) <= r2 {
                canvas.water.set(p, true);
            }
        }
        centers.push(center);
    }
    for k in 0..cfg.trunk_count {
        let center = centers[k % centers.len()];
        let Some((root, heading)) = trunk_root(&canvas, &mut rng, center) else {
            continue;
        };
        let length = rng.gen_range(side * 3 / 10..=side * 6 / 10);
        let trunk = canvas.walk(&mut rng, root, heading, length);
        canvas.branch(&mut rng, &trunk, heading, length, cfg.branch_depth);
    }
    let shore = directly_connected_mask(&canvas.network, &canvas.water)?;
    Ok((thin_keeping(&canvas.network, Some(&shore)), canvas.water))
}

/// A free pixel touching the blob at `center`, and an outward heading.
fn trunk_root(canvas: &Canvas, rng: &mut ChaCha8Rng, center: Pixel) -> Option<(Pixel, f64)> {
    for _ in 0..64 {
        let heading: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut d = 1.0;
        while d < 32.0 {
            let q = (
                center.row as i64 + (d * heading.sin()).round() as i64,
                center.col as i64 + (d * heading.cos()).round() as i64,
            );
            let p = canvas.inside(q)?;
            if !canvas.water.get(p) {
                let touches = neighbors(p, canvas.shape).any(|n| canvas.water.get(n));
                if touches && !canvas.network.get(p) {
                    return Some((p, heading));
                }
                break;
            }
            d += 1.0;
        }
    }
    None
}

/// Straight road grid: horizontal and vertical lines roughly `spacing`
/// apart, edge to edge.
pub fn generate_road_grid(shape: GridShape, spacing: usize, seed: u64) -> Result<BinaryMask> {
    if spacing < 8 {
        return Err(Error::Parameter("road spacing must be at least 8".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = BinaryMask::zeros(shape);
    let jitter = spacing / 6;
    let lines = |len: usize, rng: &mut ChaCha8Rng| {
        let mut at = Vec::new();
        let mut pos = spacing / 2;
        while pos + 2 < len {
            let j = rng.gen_range(0..=2 * jitter) as isize - jitter as isize;
            at.push((pos as isize + j).clamp(1, len as isize - 2) as usize);
            pos += spacing;
        }
        at
    };
    for r in lines(shape.rows(), &mut rng) {
        for c in 0..shape.cols() {
            mask.set(Pixel::new(r, c), true);
        }
    }
    for c in lines(shape.cols(), &mut rng) {
        for r in 0..shape.rows() {
            mask.set(Pixel::new(r, c), true);
        }
    }
    Ok(mask)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSpec {
    /// Number of segments to remove.
    pub alpha: usize,
    pub beta_choices: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapOutcome {
    pub broken: BinaryMask,
    /// Removed runs, in removal order, each ordered along the line.
    pub removed: Vec<Vec<Pixel>>,
    /// Lengths drawn from `beta_choices` before clipping.
    pub drawn_lengths: Vec<usize>,
    /// Requested gaps that found no site.
    pub shortfall: usize,
}

/// Removes `spec.alpha` contiguous runs from the simple (degree-2) stretches
/// of `network`, each at least one pixel away from junctions, line ends,
/// earlier cuts and water.
pub fn inject_gaps(network: &BinaryMask, water: &BinaryMask, spec: &GapSpec) -> Result<GapOutcome> {
    Error::ensure_same_shape(network.shape(), water.shape())?;
    if network.is_empty() {
        return Err(Error::Input(
            "cannot inject gaps into an empty network".into(),
        ));
    }
    if spec.alpha > 0 && (spec.beta_choices.is_empty() || spec.beta_choices.contains(&0)) {
        return Err(Error::Parameter("gap lengths must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut sites: Vec<Vec<Pixel>> = simple_runs(network, water)
        .into_iter()
        .filter_map(|run| trim(&run, 1, 1))
        .collect();
    let mut broken = network.clone();
    let mut removed = Vec::new();
    let mut drawn_lengths = Vec::new();
    for g in 0..spec.alpha {
        if sites.is_empty() {
            return Ok(GapOutcome {
                broken,
                removed,
                drawn_lengths,
                shortfall: spec.alpha - g,
            });
        }
        let k = rng.gen_range(0..sites.len());
        let site = sites.swap_remove(k);
        let beta = *spec.beta_choices.choose(&mut rng).expect("nonempty");
        drawn_lengths.push(beta);
        let len = beta.min(site.len());
        let start = rng.gen_range(0..=site.len() - len);
        let cut = site[start..start + len].to_vec();
        for &p in &cut {
            broken.set(p, false);
        }
        // the pixel on either side of the cut stays as its clean end
        if start >= 2 {
            sites.push(site[..start - 1].to_vec());
        }
        if start + len + 1 < site.len() {
            sites.push(site[start + len + 1..].to_vec());
        }
        removed.push(cut);
    }
    Ok(GapOutcome {
        broken,
        removed,
        drawn_lengths,
        shortfall: 0,
    })
}

fn trim(run: &[Pixel], head: usize, tail: usize) -> Option<Vec<Pixel>> {
    (run.len() > head + tail).then(|| run[head..run.len() - tail].to_vec())
}

/// Ordered chains of network pixels with exactly two network neighbors and
/// no water within one pixel.
fn simple_runs(network: &BinaryMask, water: &BinaryMask) -> Vec<Vec<Pixel>> {
    let shape = network.shape();
    let mut eligible = BinaryMask::zeros(shape);
    for p in network.pixels() {
        let degree = neighbors(p, shape).filter(|&q| network.get(q)).count();
        let wet = water.get(p) || neighbors(p, shape).any(|q| water.get(q));
        if degree == 2 && !wet {
            eligible.set(p, true);
        }
    }
    let mut seen = BinaryMask::zeros(shape);
    let mut runs = Vec::new();
    for p in eligible.pixels() {
        if seen.get(p) {
            continue;
        }
        // collect the component, then walk it from an end
        let mut component = BTreeSet::new();
        let mut stack = vec![p];
        seen.set(p, true);
        while let Some(q) = stack.pop() {
            component.insert(q);
            for n in neighbors(q, shape) {
                if eligible.get(n) && !seen.get(n) {
                    seen.set(n, true);
                    stack.push(n);
                }
            }
        }
        let inner = |q: Pixel| {
            neighbors(q, shape)
                .filter(|&n| component.contains(&n))
                .count()
        };
        let start = component
            .iter()
            .copied()
            .find(|&q| inner(q) <= 1)
            .unwrap_or_else(|| *component.first().expect("nonempty"));
        let mut chain = vec![start];
        let mut visited = BTreeSet::from([start]);
        let mut at = start;
        while let Some(next) =
            neighbors(at, shape).find(|n| component.contains(n) && !visited.contains(n))
        {
            visited.insert(next);
            chain.push(next);
            at = next;
        }
        runs.push(chain);
    }
    runs
}

/// Likelihood oracle that knows the true network.
#[derive(Debug, Clone)]
pub struct OracleProvider {
    raster: LikelihoodRaster,
}

impl OracleProvider {
    /// `hit` on the true network (dilated to `blur_kernel` width), 1.0 on
    /// background pixels drawn at rate `false_rate`, 0 elsewhere.
    pub fn new(
        true_network: &BinaryMask,
        hit: f32,
        false_rate: f64,
        blur_kernel: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&false_rate) {
            return Err(Error::Parameter(format!(
                "false_rate must lie in [0, 1], got {false_rate}"
            )));
        }
        let body = dilate(true_network, blur_kernel)?;
        let mut raster = LikelihoodRaster::from_mask(&body, hit)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (i, &on) in body.bits().iter().enumerate() {
            if !on && rng.gen_bool(false_rate) {
                raster.set(body.shape().pixel(i), 1.0)?;
            }
        }
        Ok(Self { raster })
    }

    pub fn perfect(true_network: &BinaryMask) -> Self {
        Self::new(true_network, 1.0, 0.0, 1, 0).expect("valid parameters")
    }

    pub fn raster(&self) -> &LikelihoodRaster {
        &self.raster
    }
}

impl LikelihoodProvider for OracleProvider {
    fn produce(&self, current_gt: &BinaryMask, _iteration: usize) -> Result<LikelihoodRaster> {
        Error::ensure_same_shape(current_gt.shape(), self.raster.shape())?;
        Ok(self.raster.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::detect_terminals;
    use crate::reachability::partition;

    fn shape(r: usize, c: usize) -> GridShape {
        GridShape::new(r, c).unwrap()
    }

    #[test]
    fn bresenham_is_eight_connected() {
        let line = bresenham((0, 0), (3, 7));
        assert_eq!(line.first(), Some(&(0, 0)));
        assert_eq!(line.last(), Some(&(3, 7)));
        assert_eq!(line.len(), 8);
        for w in line.windows(2) {
            assert_eq!((w[0].0 - w[1].0).abs().max((w[0].1 - w[1].1).abs()), 1);
        }
    }

    #[test]
    fn single_trunk_network() {
        let cfg = SynthConfig {
            shape: shape(128, 128),
            seed: 3,
            trunk_count: 1,
            branch_depth: 0,
            water_blobs: 1,
        };
        let (net, water) = generate_network(&cfg).unwrap();
        assert!(net.count_ones() > 10);
        assert_eq!(crate::components::count_components(&net), 1);
        assert_eq!(crate::components::count_components(&water), 1);
        let p = partition(&net, &water, &net).unwrap();
        assert!(p.unreachable.is_empty());
        // a simple polyline has exactly two ends
        assert_eq!(detect_terminals(&net).len(), 2);
    }

    #[test]
    fn generation_is_seeded() {
        let cfg = SynthConfig {
            shape: shape(200, 160),
            seed: 11,
            trunk_count: 4,
            branch_depth: 2,
            water_blobs: 2,
        };
        assert_eq!(
            generate_network(&cfg).unwrap(),
            generate_network(&cfg).unwrap()
        );
        let other = SynthConfig {
            seed: 12,
            ..cfg.clone()
        };
        assert_ne!(
            generate_network(&cfg).unwrap().0,
            generate_network(&other).unwrap().0
        );
    }

    #[test]
    fn infeasible_configs() {
        let mut cfg = SynthConfig {
            shape: shape(8, 8),
            seed: 0,
            trunk_count: 1,
            branch_depth: 0,
            water_blobs: 1,
        };
        assert!(generate_network(&cfg).is_err());
        cfg.shape = shape(64, 64);
        cfg.water_blobs = 0;
        assert!(generate_network(&cfg).is_err());
    }

    #[test]
    fn gap_in_a_line() {
        let s = shape(3, 104);
        let line = BinaryMask::from_pixels(s, (2..102).map(|c| Pixel::new(1, c))).unwrap();
        let water = BinaryMask::zeros(s);
        let out = inject_gaps(
            &line,
            &water,
            &GapSpec {
                alpha: 1,
                beta_choices: vec![20],
                seed: 5,
            },
        )
        .unwrap();
        assert_eq!(out.broken.count_ones(), 80);
        assert_eq!(out.removed.len(), 1);
        assert_eq!(out.removed[0].len(), 20);
        let ends = detect_terminals(&out.broken);
        assert_eq!(ends.len(), 4);
        let cut = &out.removed[0];
        let near_cut = ends
            .iter()
            .filter(|t| {
                t.at.is_moore_adjacent(cut[0]) || t.at.is_moore_adjacent(*cut.last().unwrap())
            })
            .count();
        assert_eq!(near_cut, 2);
    }

    #[test]
    fn no_gaps_is_identity() {
        let s = shape(3, 20);
        let line = BinaryMask::from_pixels(s, (2..18).map(|c| Pixel::new(1, c))).unwrap();
        let out = inject_gaps(
            &line,
            &BinaryMask::zeros(s),
            &GapSpec {
                alpha: 0,
                beta_choices: vec![],
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(out.broken, line);
        assert!(out.removed.is_empty());
    }

    #[test]
    fn shortfall_is_reported() {
        let s = shape(3, 12);
        let line = BinaryMask::from_pixels(s, (1..11).map(|c| Pixel::new(1, c))).unwrap();
        let out = inject_gaps(
            &line,
            &BinaryMask::zeros(s),
            &GapSpec {
                alpha: 10,
                beta_choices: vec![3],
                seed: 9,
            },
        )
        .unwrap();
        assert!(out.shortfall > 0);
        assert_eq!(out.removed.len() + out.shortfall, 10);
    }

    #[test]
    fn water_adjacent_pixels_are_kept() {
        let s = shape(3, 12);
        let line = BinaryMask::from_pixels(s, (1..12).map(|c| Pixel::new(1, c))).unwrap();
        let water = BinaryMask::from_pixels(s, [Pixel::new(1, 0)]).unwrap();
        for seed in 0..20 {
            let out = inject_gaps(
                &line,
                &water,
                &GapSpec {
                    alpha: 3,
                    beta_choices: vec![1, 2],
                    seed,
                },
            )
            .unwrap();
            assert!(out.broken.get(Pixel::new(1, 1)));
        }
    }

    #[test]
    fn oracle_variants() {
        let s = shape(16, 16);
        let net = BinaryMask::from_pixels(s, (0..16).map(|c| Pixel::new(8, c))).unwrap();
        let perfect = OracleProvider::perfect(&net);
        assert_eq!(perfect.raster().threshold(0.5), net);
        assert!(perfect
            .raster()
            .values()
            .iter()
            .all(|&v| v == 0.0 || v == 1.0));
        let blind = OracleProvider::new(&net, 0.0, 0.0, 1, 1).unwrap();
        assert!(blind.raster().values().iter().all(|&v| v == 0.0));
        let wide = OracleProvider::new(&net, 0.7, 0.0, 3, 1).unwrap();
        assert_eq!(wide.raster().threshold(0.5).count_ones(), 48);
        assert!(OracleProvider::new(&net, 1.0, 0.0, 2, 1).is_err());
        assert!(OracleProvider::new(&net, 1.0, 1.5, 1, 1).is_err());
        let other = BinaryMask::zeros(shape(4, 4));
        assert!(perfect.produce(&other, 0).is_err());
    }

    #[test]
    fn road_grid_is_connected() {
        let g = generate_road_grid(shape(200, 200), 50, 4).unwrap();
        assert_eq!(crate::components::count_components(&g), 1);
        assert_eq!(generate_road_grid(shape(200, 200), 50, 4).unwrap(), g);
    }
}
