//! Likelihood providers that do not simulate a learner, and the textual
//! provider spec accepted on the command line.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, FormatKind, Result};
use crate::io::{read_pfm, read_pgm};
use crate::pipeline::LikelihoodProvider;
use crate::raster::{BinaryMask, LikelihoodRaster};
use crate::synth::OracleProvider;

/// Reads `DIR/iter_<i>.pfm` for iteration `i`.
#[derive(Debug, Clone)]
pub struct FileProvider {
    dir: PathBuf,
}

impl FileProvider {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, iteration: usize) -> PathBuf {
        self.dir.join(format!("iter_{iteration}.pfm"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

impl LikelihoodProvider for FileProvider {
    fn produce(&self, current_gt: &BinaryMask, iteration: usize) -> Result<LikelihoodRaster> {
        let path = self.path_for(iteration);
        let raster = read_pfm(&path).map_err(|e| match e {
            Error::Io(io) => Error::Provider {
                iteration,
                reason: format!("{}: {io}", path.display()),
            },
            other => other,
        })?;
        Error::ensure_same_shape(current_gt.shape(), raster.shape())?;
        Ok(raster)
    }
}

/// The same value everywhere.
#[derive(Debug, Clone, Copy)]
pub struct ConstantProvider(pub f32);

impl LikelihoodProvider for ConstantProvider {
    fn produce(&self, current_gt: &BinaryMask, _iteration: usize) -> Result<LikelihoodRaster> {
        LikelihoodRaster::filled(current_gt.shape(), self.0)
    }
}

/// Parsed form of `--provider`.
///
/// ```text
/// oracle:truth=<mask.pgm>[,hit=<f>][,false_rate=<f>][,blur=<odd>][,seed=<u64>]
/// constant:<f>
/// file:<dir>
/// ```
#[derive(Debug, Clone, PartialEq)]
pub enum ProviderSpec {
    Oracle(OracleSpec),
    Constant(f32),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpec {
    pub truth: PathBuf,
    pub hit: f32,
    pub false_rate: f64,
    pub blur: usize,
    pub seed: u64,
}

fn spec_err(reason: impl Into<String>) -> Error {
    Error::format(FormatKind::ProviderSpec, reason)
}

fn unit_interval<T: FromStr + PartialOrd + From<u8>>(key: &str, v: &str) -> Result<T> {
    let x: T = v
        .parse()
        .map_err(|_| spec_err(format!("{key}: not a number: {v:?}")))?;
    if !(x >= T::from(0) && x <= T::from(1)) {
        return Err(spec_err(format!("{key} must lie in [0, 1]")));
    }
    Ok(x)
}

impl FromStr for ProviderSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| spec_err("expected <kind>:<arguments>"))?;
        match kind {
            "constant" => Ok(ProviderSpec::Constant(unit_interval::<f32>(
                "constant", body,
            )?)),
            "file" if !body.is_empty() => Ok(ProviderSpec::File(PathBuf::from(body))),
            "file" => Err(spec_err("file provider needs a directory")),
            "oracle" => {
                let mut truth = None;
                let mut spec = OracleSpec {
                    truth: PathBuf::new(),
                    hit: 1.0,
                    false_rate: 0.0,
                    blur: 1,
                    seed: 0,
                };
                for item in body.split(',').filter(|i| !i.is_empty()) {
                    let (key, value) = item
                        .split_once('=')
                        .ok_or_else(|| spec_err(format!("expected key=value, got {item:?}")))?;
                    match key {
                        "truth" if !value.is_empty() => truth = Some(PathBuf::from(value)),
                        "hit" => spec.hit = unit_interval("hit", value)?,
                        "false_rate" => spec.false_rate = unit_interval("false_rate", value)?,
                        "blur" => {
                            spec.blur = value.parse().map_err(|_| {
                                spec_err(format!("blur: not an integer: {value:?}"))
                            })?;
                            if spec.blur.is_multiple_of(2) {
                                return Err(spec_err("blur must be odd"));
                            }
                        }
                        "seed" => {
                            spec.seed = value
                                .parse()
                                .map_err(|_| spec_err(format!("seed: not an integer: {value:?}")))?
                        }
                        _ => return Err(spec_err(format!("unknown oracle key {key:?}"))),
                    }
                }
                spec.truth = truth.ok_or_else(|| spec_err("oracle needs truth=<mask.pgm>"))?;
                Ok(ProviderSpec::Oracle(spec))
            }
            other => Err(spec_err(format!("unknown provider kind {other:?}"))),
        }
    }
}

impl ProviderSpec {
    /// Instantiates the provider, loading the oracle truth mask if needed.
    pub fn build(&self) -> Result<Box<dyn LikelihoodProvider + Send + Sync>> {
        Ok(match self {
            ProviderSpec::Oracle(o) => {
                let truth = read_pgm(&o.truth)?;
                Box::new(OracleProvider::new(
                    &truth,
                    o.hit,
                    o.false_rate,
                    o.blur,
                    o.seed,
                )?)
            }
            ProviderSpec::Constant(v) => Box::new(ConstantProvider(*v)),
            ProviderSpec::File(dir) => Box::new(FileProvider::new(dir)),
        })
    }

    /// Files the provider will read, where they can be known up front.
    pub fn inputs(&self, iterations: usize) -> Vec<PathBuf> {
        match self {
            ProviderSpec::Oracle(o) => vec![o.truth.clone()],
            ProviderSpec::Constant(_) => Vec::new(),
            ProviderSpec::File(dir) => {
                let p = FileProvider::new(dir);
                (0..iterations).map(|i| p.path_for(i)).collect()
            }
        }
    }
}

/// Parses a comma-separated list such as `0.2,0.2,0.1` or `0,3`.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = s.split(',').map(str::trim).collect();
    if items.iter().any(|i| i.is_empty()) {
        return Err(Error::format(
            FormatKind::List,
            format!("empty item in {s:?}"),
        ));
    }
    items
        .into_iter()
        .map(|i| {
            i.parse()
                .map_err(|_| Error::format(FormatKind::List, format!("bad item {i:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_pfm;
    use crate::raster::GridShape;

    #[test]
    fn oracle_spec_defaults_and_overrides() {
        let s: ProviderSpec = "oracle:truth=net.pgm,hit=0.9,blur=3,seed=42"
            .parse()
            .unwrap();
        assert_eq!(
            s,
            ProviderSpec::Oracle(OracleSpec {
                truth: "net.pgm".into(),
                hit: 0.9,
                false_rate: 0.0,
                blur: 3,
                seed: 42,
            })
        );
    }

    #[test]
    fn bad_specs() {
        for bad in [
            "oracle",
            "oracle:hit=1",
            "oracle:truth=a.pgm,hit=2",
            "oracle:truth=a.pgm,blur=2",
            "oracle:truth=a.pgm,color=red",
            "oracle:truth=a.pgm,hit",
            "constant:NaN",
            "constant:-0.5",
            "file:",
            "learner:x",
        ] {
            assert!(bad.parse::<ProviderSpec>().is_err(), "{bad}");
        }
        assert_eq!(
            "constant:0.25".parse::<ProviderSpec>().unwrap(),
            ProviderSpec::Constant(0.25)
        );
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<f32>("0.2,0.2,0.1,0.01,0.01").unwrap().len(), 5);
        assert_eq!(parse_list::<usize>("0, 3").unwrap(), vec![0, 3]);
        assert!(parse_list::<usize>("1,,2").is_err());
        assert!(parse_list::<usize>("").is_err());
        assert!(parse_list::<usize>("x").is_err());
    }

    #[test]
    fn file_provider_reads_per_iteration() {
        let dir = tempfile::tempdir().unwrap();
        let shape = GridShape::new(2, 3).unwrap();
        let r =
            LikelihoodRaster::from_values(shape, vec![0.0, 0.5, 1.0, 0.25, 0.75, 0.125]).unwrap();
        let p = FileProvider::new(dir.path());
        write_pfm(p.path_for(1), &r).unwrap();
        let gt = BinaryMask::zeros(shape);
        assert_eq!(p.produce(&gt, 1).unwrap(), r);
        match p.produce(&gt, 0) {
            Err(Error::Provider {
                iteration: 0,
                reason,
            }) => assert!(reason.contains("iter_0.pfm")),
            other => panic!("{other:?}"),
        }
        let other = BinaryMask::zeros(GridShape::new(3, 2).unwrap());
        assert!(matches!(
            p.produce(&other, 1),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
