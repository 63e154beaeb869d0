//! Pixel metrics with an r-neighborhood tolerance.
//!
//! A predicted pixel is a hit when any ground-truth pixel lies within its
//! r-neighborhood, and a ground-truth pixel is missed when no prediction
//! lies within its r-neighborhood. `r = 0` is ordinary pixel matching.

use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::morphology::dilate;
use crate::raster::{BinaryMask, Pixel};

/// Shape of the r-neighborhood.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Neighborhood {
    /// Chebyshev window of side `2r + 1`.
    #[default]
    Square,
    /// Euclidean disk of radius `r`.
    Disk,
}

impl FromStr for Neighborhood {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Neighborhood::Square),
            "disk" => Ok(Neighborhood::Disk),
            other => Err(Error::Parameter(format!("unknown neighborhood {other:?}"))),
        }
    }
}

impl Neighborhood {
    /// Offsets `(dr, dc)` covered at radius `r`.
    pub fn offsets(self, r: usize) -> Vec<(isize, isize)> {
        let r = r as isize;
        let mut out = Vec::new();
        for dr in -r..=r {
            for dc in -r..=r {
                if self == Neighborhood::Square || dr * dr + dc * dc <= r * r {
                    out.push((dr, dc));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RConfusion {
    pub r: usize,
    pub rtp: usize,
    pub rfp: usize,
    pub rfn: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreSet {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
}

/// Square-neighborhood confusion counts.
pub fn r_confusion(pred: &BinaryMask, gt: &BinaryMask, r: usize) -> Result<RConfusion> {
    r_confusion_with(pred, gt, r, Neighborhood::Square)
}

pub fn r_confusion_with(
    pred: &BinaryMask,
    gt: &BinaryMask,
    r: usize,
    neighborhood: Neighborhood,
) -> Result<RConfusion> {
    Error::ensure_same_shape(pred.shape(), gt.shape())?;
    let (gt_near, pred_near) = match neighborhood {
        Neighborhood::Square => (dilate(gt, 2 * r + 1)?, dilate(pred, 2 * r + 1)?),
        Neighborhood::Disk => {
            let offsets = neighborhood.offsets(r);
            (spread(gt, &offsets), spread(pred, &offsets))
        }
    };
    let mut c = RConfusion {
        r,
        rtp: 0,
        rfp: 0,
        rfn: 0,
    };
    for ((&p, &y), (&near_y, &near_p)) in pred
        .bits()
        .iter()
        .zip(gt.bits())
        .zip(gt_near.bits().iter().zip(pred_near.bits()))
    {
        if p {
            if near_y {
                c.rtp += 1;
            } else {
                c.rfp += 1;
            }
        }
        if y && !near_p {
            c.rfn += 1;
        }
    }
    Ok(c)
}

/// Dilation by an arbitrary symmetric offset set.
fn spread(mask: &BinaryMask, offsets: &[(isize, isize)]) -> BinaryMask {
    let shape = mask.shape();
    let mut out = BinaryMask::zeros(shape);
    for p in mask.pixels() {
        for &(dr, dc) in offsets {
            if let Some(q) = shape.offset(p, dr, dc) {
                out.set(q, true);
            }
        }
    }
    out
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall, F1 and IoU; any score with a zero denominator is 0.
pub fn scores(c: &RConfusion) -> ScoreSet {
    let precision = ratio(c.rtp, c.rtp + c.rfp);
    let recall = ratio(c.rtp, c.rtp + c.rfn);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ScoreSet {
        precision,
        recall,
        f1,
        iou: ratio(c.rtp, c.rtp + c.rfp + c.rfn),
    }
}

/// Exact-match scores.
pub fn conventional_scores(pred: &BinaryMask, gt: &BinaryMask) -> Result<ScoreSet> {
    Error::ensure_same_shape(pred.shape(), gt.shape())?;
    let mut tp = 0;
    let mut fp = 0;
    let mut fneg = 0;
    for (&p, &y) in pred.bits().iter().zip(gt.bits()) {
        match (p, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    Ok(scores(&RConfusion {
        r: 0,
        rtp: tp,
        rfp: fp,
        rfn: fneg,
    }))
}

/// True when `mask` has a foreground pixel in the neighborhood of `p`.
pub fn any_within(mask: &BinaryMask, p: Pixel, r: usize, neighborhood: Neighborhood) -> bool {
    neighborhood
        .offsets(r)
        .into_iter()
        .any(|(dr, dc)| mask.get_offset(p, dr, dc))
}
