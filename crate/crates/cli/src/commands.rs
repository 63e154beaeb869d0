use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use netrefine::io::{read_pgm, write_pgm};
use netrefine::metrics::{
    conventional_scores, r_confusion_with, scores, Neighborhood, RConfusion, ScoreSet,
};
use netrefine::reachability::partition;
use netrefine::roadnet::{road_refine, sample_points};
use netrefine::synth::{
    generate_network, generate_road_grid, inject_gaps, GapSpec, OracleProvider, SynthConfig,
};
use netrefine::{run, AlphaSchedule, BinaryMask, GridShape, RefineConfig};
use serde::Serialize;

use crate::args::{
    AnalyzeArgs, CompletionArgs, Kind, MetricsArgs, RefineArgs, RoadgapArgs, SynthArgs,
};
use crate::error::CliError;
use crate::manifest::{digest, RunManifest};

/// Tracks what a subcommand read and wrote for the manifest.
pub struct Session<'a> {
    pub manifest: &'a mut RunManifest,
}

impl Session<'_> {
    fn note_input(&mut self, path: &Path) -> Result<(), CliError> {
        let d = digest(path).map_err(|e| CliError::io(path, e))?;
        self.manifest.inputs.insert(path.display().to_string(), d);
        Ok(())
    }

    fn read_mask(&mut self, path: &Path) -> Result<BinaryMask, CliError> {
        let mask = read_pgm(path).map_err(|e| with_path(e, path))?;
        self.note_input(path)?;
        Ok(mask)
    }

    fn write_mask(&mut self, path: &Path, mask: &BinaryMask) -> Result<(), CliError> {
        write_pgm(path, mask).map_err(|e| with_path(e, path))?;
        self.manifest.outputs.push(path.to_path_buf());
        Ok(())
    }

    fn write_json<T: Serialize + ?Sized>(
        &mut self,
        path: &Path,
        value: &T,
    ) -> Result<(), CliError> {
        fs::write(path, to_json(value)?).map_err(|e| CliError::io(path, e))?;
        self.manifest.outputs.push(path.to_path_buf());
        Ok(())
    }

    /// Writes to `path`, or to standard output when none is given.
    fn emit_json<T: Serialize + ?Sized>(
        &mut self,
        path: Option<&Path>,
        value: &T,
    ) -> Result<(), CliError> {
        match path {
            Some(p) => self.write_json(p, value),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(to_json(value)?.as_bytes())
                    .map_err(|e| CliError::io(Path::new("<stdout>"), e))
            }
        }
    }
}

fn with_path(e: netrefine::Error, path: &Path) -> CliError {
    match e {
        netrefine::Error::Io(io) => CliError::io(path, io),
        other => CliError::Core(other),
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn refine_config(c: &CompletionArgs) -> Result<RefineConfig, CliError> {
    let alpha = match c.alpha.0.as_slice() {
        [a] => AlphaSchedule::Constant(*a),
        many => AlphaSchedule::from_values(many.to_vec())?,
    };
    let cfg = RefineConfig {
        rho: c.rho,
        tau: c.tau,
        alpha,
        max_iterations: c.iters,
        dilation_kernel: c.kernel,
        ..RefineConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn analyze(s: &mut Session, a: &AnalyzeArgs) -> Result<(), CliError> {
    let network = s.read_mask(&a.network)?;
    let water = s.read_mask(&a.water)?;
    let gt = match &a.gt {
        Some(p) => s.read_mask(p)?,
        None => network.clone(),
    };
    let report = partition(&network, &water, &gt)?.summary();
    s.emit_json(a.out.as_deref(), &report)
}

pub fn refine(s: &mut Session, a: &RefineArgs) -> Result<(), CliError> {
    let gt = s.read_mask(&a.gt)?;
    let water = s.read_mask(&a.water)?;
    let mut cfg = refine_config(&a.completion)?;
    cfg.basis = a.basis.into();
    let spec = a.provider_spec();
    let provider = spec.build()?;
    let out = run(&gt, &water, &provider, &cfg)?;
    for path in spec.inputs(out.history.len()) {
        s.note_input(&path)?;
    }
    s.write_mask(&a.out, &out.refined)?;
    s.write_json(&a.stats, &out.history)?;
    if let Some(p) = &a.dump_paths {
        s.write_json(p, &out.paths)?;
    }
    let last = out.history.last();
    log::info!(
        "{} iterations, {} pixels added, {} unreachable before the last iteration",
        out.history.len(),
        out.history.iter().map(|h| h.pixels_added).sum::<usize>(),
        last.map_or(0, |h| h.unreachable_px)
    );
    Ok(())
}

#[derive(Serialize)]
struct RBlock {
    rtp: usize,
    rfp: usize,
    rfn: usize,
    #[serde(flatten)]
    scores: ScoreSet,
}

#[derive(Serialize)]
struct ConventionalBlock {
    tp: usize,
    fp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
    #[serde(flatten)]
    scores: ScoreSet,
}

#[derive(Serialize)]
struct MetricsReport {
    neighborhood: Neighborhood,
    r: BTreeMap<String, RBlock>,
    conventional: ConventionalBlock,
}

pub fn metrics(s: &mut Session, a: &MetricsArgs) -> Result<(), CliError> {
    let pred = s.read_mask(&a.pred)?;
    let gt = s.read_mask(&a.gt)?;
    netrefine::Error::ensure_same_shape(pred.shape(), gt.shape())?;
    let nb: Neighborhood = a.neighborhood.into();
    let mut r = BTreeMap::new();
    for &radius in &a.r.0 {
        let c = r_confusion_with(&pred, &gt, radius, nb)?;
        r.insert(
            radius.to_string(),
            RBlock {
                rtp: c.rtp,
                rfp: c.rfp,
                rfn: c.rfn,
                scores: scores(&c),
            },
        );
    }
    let RConfusion { rtp, rfp, rfn, .. } = r_confusion_with(&pred, &gt, 0, nb)?;
    let report = MetricsReport {
        neighborhood: nb,
        r,
        conventional: ConventionalBlock {
            tp: rtp,
            fp: rfp,
            fn_: rfn,
            scores: conventional_scores(&pred, &gt)?,
        },
    };
    s.emit_json(a.out.as_deref(), &report)
}

#[derive(Serialize)]
struct RemovedReport<'a> {
    removed: &'a [Vec<netrefine::Pixel>],
    drawn_lengths: &'a [usize],
    shortfall: usize,
    unreachable_fraction: f64,
}

pub fn synth(s: &mut Session, a: &SynthArgs) -> Result<(), CliError> {
    let shape = GridShape::new(a.rows, a.cols)?;
    let (network, water) = match a.kind {
        Kind::Canal => generate_network(&SynthConfig {
            shape,
            seed: a.seed,
            trunk_count: a.trunks,
            branch_depth: a.depth,
            water_blobs: a.blobs,
        })?,
        Kind::Road => (
            generate_road_grid(shape, a.spacing, a.seed)?,
            BinaryMask::zeros(shape),
        ),
    };
    let gaps = inject_gaps(
        &network,
        &water,
        &GapSpec {
            alpha: a.gaps,
            beta_choices: a.beta.0.clone(),
            seed: a.gap_seed.unwrap_or(a.seed),
        },
    )?;
    if gaps.shortfall > 0 {
        log::warn!("placed {} of {} gaps", a.gaps - gaps.shortfall, a.gaps);
    }
    let fraction = partition(&gaps.broken, &water, &gaps.broken)?.unreachable_fraction();
    out_dir(&a.out_dir)?;
    let path = |name: &str| -> PathBuf { a.out_dir.join(name) };
    s.write_mask(&path("network.pgm"), &network)?;
    s.write_mask(&path("water.pgm"), &water)?;
    s.write_mask(&path("broken.pgm"), &gaps.broken)?;
    s.write_json(
        &path("removed.json"),
        &RemovedReport {
            removed: &gaps.removed,
            drawn_lengths: &gaps.drawn_lengths,
            shortfall: gaps.shortfall,
            unreachable_fraction: fraction,
        },
    )
}

pub fn roadgap(s: &mut Session, a: &RoadgapArgs) -> Result<(), CliError> {
    let gt = s.read_mask(&a.gt)?;
    let cfg = refine_config(&a.completion)?;
    let water = BinaryMask::zeros(gt.shape());
    let gaps = inject_gaps(
        &gt,
        &water,
        &GapSpec {
            alpha: a.gaps,
            beta_choices: a.beta.0.clone(),
            seed: a.seed,
        },
    )?;
    let pts = sample_points(&gaps.broken, a.points, a.seed)?;
    let provider: Box<dyn netrefine::LikelihoodProvider + Send + Sync> = match &a.provider {
        Some(text) => {
            let spec: netrefine::provider::ProviderSpec = text.parse()?;
            for p in spec
                .inputs(cfg.max_iterations)
                .iter()
                .filter(|p| p.exists())
            {
                s.note_input(p)?;
            }
            spec.build()?
        }
        None => Box::new(OracleProvider::perfect(&gt)),
    };
    let out = road_refine(&gt, &gaps.broken, &provider, &cfg, &pts)?;
    out_dir(&a.out_dir)?;
    s.write_mask(&a.out_dir.join("broken.pgm"), &gaps.broken)?;
    s.write_mask(&a.out_dir.join("refined.pgm"), &out.refined)?;
    s.write_json(&a.out_dir.join("trace.json"), &out.trace)?;
    s.write_json(&a.out_dir.join("comparison.json"), &out.comparison())
}
