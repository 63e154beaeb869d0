//! Reachability-constrained completion of infrastructure networks in raster
//! label masks.
//!
//! The crate refines an incomplete ground-truth network (canals, roads) by
//! repeatedly connecting dangling unreachable segments to sources along
//! confidence-weighted shortest paths. The segmentation model that supplies
//! those confidences is abstracted as a [`LikelihoodProvider`].

pub mod completion;
pub mod components;
pub mod error;
pub mod io;
pub mod metrics;
pub mod morphology;
pub mod pipeline;
pub mod provider;
pub mod raster;
pub mod reachability;
pub mod roadnet;
pub mod synth;

pub use error::{Error, FormatKind, Result};
pub use pipeline::{
    precompletion, refine_iteration, run, AlphaSchedule, IterationStats, LikelihoodProvider,
    ReachabilityBasis, RefineConfig, RefineOutcome,
};
pub use raster::{moore_neighbors, BinaryMask, GridShape, LikelihoodRaster, Pixel};

/// Crate version, echoed in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
