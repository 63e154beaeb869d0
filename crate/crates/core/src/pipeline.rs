//! Iterative ground-truth refinement.
//!
//! Each iteration asks the likelihood provider for a confidence raster given
//! the current labels, builds the pre-completion network, finds unreachable
//! terminals, solves one completion instance per terminal and stamps the
//! winning paths into the labels. Labels only ever flip from 0 to 1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::completion::{
    build_local_graph, build_weight_raster, detect_terminals, pair_sources, solve_instance,
    stamp_paths, water_edge_points, CompletionInstance, CompletionPath, Terminal,
};
use crate::error::{Error, Result};
use crate::morphology::{dilate, thin};
use crate::raster::{BinaryMask, LikelihoodRaster};
use crate::reachability::{partition, ReachabilityPartition};

/// Stand-in for the segmentation learner.
///
/// Implementations must return a raster of the same shape as `current_gt`
/// and be deterministic in `(current_gt, iteration)` and their own seed.
pub trait LikelihoodProvider {
    fn produce(&self, current_gt: &BinaryMask, iteration: usize) -> Result<LikelihoodRaster>;
}

impl<P: LikelihoodProvider + ?Sized> LikelihoodProvider for &P {
    fn produce(&self, current_gt: &BinaryMask, iteration: usize) -> Result<LikelihoodRaster> {
        (**self).produce(current_gt, iteration)
    }
}

impl<P: LikelihoodProvider + ?Sized> LikelihoodProvider for Box<P> {
    fn produce(&self, current_gt: &BinaryMask, iteration: usize) -> Result<LikelihoodRaster> {
        (**self).produce(current_gt, iteration)
    }
}

/// Confidence threshold, fixed or one value per iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSchedule {
    Constant(f32),
    PerIteration(Vec<f32>),
}

impl AlphaSchedule {
    pub fn at(&self, iteration: usize) -> f32 {
        match self {
            AlphaSchedule::Constant(a) => *a,
            AlphaSchedule::PerIteration(v) => v[iteration.min(v.len() - 1)],
        }
    }

    /// One value becomes a constant, several a per-iteration schedule.
    pub fn from_values(values: Vec<f32>) -> Result<Self> {
        match values.as_slice() {
            [] => Err(Error::Parameter("empty alpha schedule".into())),
            [a] => Ok(AlphaSchedule::Constant(*a)),
            _ => Ok(AlphaSchedule::PerIteration(values)),
        }
    }

    fn values(&self) -> &[f32] {
        match self {
            AlphaSchedule::Constant(a) => std::slice::from_ref(a),
            AlphaSchedule::PerIteration(v) => v,
        }
    }
}

/// Which mask reachability is evaluated on each iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReachabilityBasis {
    /// The current labels; the pre-completion network only supplies
    /// weight-1 corridors.
    #[default]
    GroundTruth,
    /// The pre-completion network, restricted to the labels afterwards.
    PreCompletion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub rho: usize,
    pub tau: f32,
    pub alpha: AlphaSchedule,
    pub max_iterations: usize,
    pub dilation_kernel: usize,
    #[serde(default)]
    pub basis: ReachabilityBasis,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            rho: 100,
            tau: 0.5,
            alpha: AlphaSchedule::PerIteration(vec![0.2, 0.2, 0.1, 0.01, 0.01]),
            max_iterations: 5,
            dilation_kernel: 5,
            basis: ReachabilityBasis::GroundTruth,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if self.rho == 0 {
            return bad("rho must be positive".into());
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if self.dilation_kernel == 0 || self.dilation_kernel.is_multiple_of(2) {
            return bad(format!(
                "dilation kernel must be odd, got {}",
                self.dilation_kernel
            ));
        }
        for &a in self.alpha.values() {
            if a.is_nan() || !(0.0..1.0).contains(&a) {
                return bad(format!("alpha must lie in [0, 1), got {a}"));
            }
        }
        if let AlphaSchedule::PerIteration(v) = &self.alpha {
            if v.len() != self.max_iterations {
                return bad(format!(
                    "alpha schedule has {} entries for {} iterations",
                    v.len(),
                    self.max_iterations
                ));
            }
        }
        Ok(())
    }
}

/// Per-iteration counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub reachable_px: usize,
    pub unreachable_px: usize,
    pub terminals: usize,
    pub instances_solved: usize,
    pub instances_unsolvable: usize,
    pub pixels_added: usize,
}

/// Result of one refinement iteration.
#[derive(Debug, Clone)]
pub struct IterationOutcome {
    pub next_gt: BinaryMask,
    pub stats: IterationStats,
    pub paths: Vec<CompletionPath>,
}

/// Result of a full run.
#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub refined: BinaryMask,
    pub history: Vec<IterationStats>,
    pub paths: Vec<Vec<CompletionPath>>,
}

/// `thin(dilate(gt) | (w >= tau)) | gt`.
pub fn precompletion(
    current_gt: &BinaryMask,
    w: &LikelihoodRaster,
    tau: f32,
    dilation_kernel: usize,
) -> Result<BinaryMask> {
    Error::ensure_same_shape(current_gt.shape(), w.shape())?;
    let merged = dilate(current_gt, dilation_kernel)?.union(&w.threshold(tau))?;
    thin(&merged).union(current_gt)
}

/// Terminals, solved paths and unsolvable count for one partition.
pub(crate) struct SolveRound {
    pub terminals: Vec<Terminal>,
    pub paths: Vec<CompletionPath>,
    pub unsolvable: usize,
}

/// Solves every terminal of `unreachable` against `candidates` in parallel;
/// results keep terminal order.
pub(crate) fn solve_round<F>(
    terminals: Vec<Terminal>,
    w: &LikelihoodRaster,
    precompletion: &BinaryMask,
    rho: usize,
    alpha: f32,
    sources_for: F,
) -> Result<SolveRound>
where
    F: Fn(Terminal) -> Vec<crate::raster::Pixel> + Sync,
{
    let x_r = build_weight_raster(&terminals, w, precompletion, rho, alpha)?;
    let solved: Vec<Option<CompletionPath>> = terminals
        .par_iter()
        .map(|&t| {
            let sources = sources_for(t);
            if sources.is_empty() {
                return Ok(None);
            }
            let local_graph = build_local_graph(&x_r, t, rho)?;
            Ok(solve_instance(&CompletionInstance {
                terminal: t,
                sources,
                local_graph,
            }))
        })
        .collect::<Result<_>>()?;
    let unsolvable = solved.iter().filter(|p| p.is_none()).count();
    Ok(SolveRound {
        terminals,
        paths: solved.into_iter().flatten().collect(),
        unsolvable,
    })
}

pub fn refine_iteration<P: LikelihoodProvider + ?Sized>(
    current_gt: &BinaryMask,
    water: &BinaryMask,
    provider: &P,
    cfg: &RefineConfig,
    iteration: usize,
) -> Result<IterationOutcome> {
    cfg.validate()?;
    Error::ensure_same_shape(current_gt.shape(), water.shape())?;
    if iteration >= cfg.max_iterations {
        return Err(Error::Parameter(format!(
            "iteration {iteration} beyond max_iterations {}",
            cfg.max_iterations
        )));
    }
    let w = provider.produce(current_gt, iteration)?;
    Error::ensure_same_shape(current_gt.shape(), w.shape())?;
    let hc = precompletion(current_gt, &w, cfg.tau, cfg.dilation_kernel)?;
    let part: ReachabilityPartition = match cfg.basis {
        ReachabilityBasis::GroundTruth => partition(current_gt, water, current_gt)?,
        ReachabilityBasis::PreCompletion => partition(&hc, water, current_gt)?,
    };
    let terminals = detect_terminals(&part.unreachable);
    let candidates = water_edge_points(water).union(&part.reachable)?;
    let rho = cfg.rho as f64;
    let round = solve_round(terminals, &w, &hc, cfg.rho, cfg.alpha.at(iteration), |t| {
        pair_sources(t, &candidates, rho)
    })?;
    let (next_gt, pixels_added) = stamp_paths(current_gt, &round.paths)?;
    log::debug!(
        "iteration {iteration}: {} terminals, {} paths, {pixels_added} pixels added",
        round.terminals.len(),
        round.paths.len()
    );
    Ok(IterationOutcome {
        next_gt,
        stats: IterationStats {
            iteration,
            reachable_px: part.reachable.count_ones(),
            unreachable_px: part.unreachable.count_ones(),
            terminals: round.terminals.len(),
            instances_solved: round.paths.len(),
            instances_unsolvable: round.unsolvable,
            pixels_added,
        },
        paths: round.paths,
    })
}

/// Runs up to `max_iterations`, stopping once an iteration adds no pixels
/// and leaves the terminal count where the previous iteration had it (or
/// finds no terminals at all).
pub fn run<P: LikelihoodProvider + ?Sized>(
    gt: &BinaryMask,
    water: &BinaryMask,
    provider: &P,
    cfg: &RefineConfig,
) -> Result<RefineOutcome> {
    cfg.validate()?;
    Error::ensure_same_shape(gt.shape(), water.shape())?;
    let mut current = gt.clone();
    let mut history: Vec<IterationStats> = Vec::new();
    let mut paths = Vec::new();
    for i in 0..cfg.max_iterations {
        let out = refine_iteration(&current, water, provider, cfg, i)?;
        let previous_terminals = history.last().map_or(0, |s| s.terminals);
        let stalled = out.stats.pixels_added == 0 && out.stats.terminals == previous_terminals;
        current = out.next_gt;
        history.push(out.stats);
        paths.push(out.paths);
        if stalled {
            break;
        }
    }
    Ok(RefineOutcome {
        refined: current,
        history,
        paths,
    })
}
