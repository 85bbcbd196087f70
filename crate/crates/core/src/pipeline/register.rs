use super::harris::{detect_interest_points, InterestPointConfig};
use super::piecewise::{build_piecewise_linear, warp_image, PiecewiseLinearTransform};
use super::refine::{iterative_refine, master_order, ControlPoint, ControlPointSet, RefineConfig};
use crate::error::{Error, Result};
use crate::raster::{Image, Point2};
use crate::scalar::Real;
use crate::similarity::{match_points, MatchConfig, MatchResult, PreparedImage};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Why a candidate point did not become a bidirectional control point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// Template or search footprint leaves an image.
    Footprint,
    /// Flat similarity surface.
    Degenerate,
    /// Backward match landed farther than the tolerance, pixels.
    Inconsistent(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub master: Point2,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default)]
pub struct BidirectionalOutcome {
    /// Forward matches in input order, flagged when the backward match agrees.
    pub forward: ControlPointSet,
    pub rejected: Vec<Rejection>,
}

impl BidirectionalOutcome {
    pub fn verified(&self) -> ControlPointSet {
        self.forward.iter().filter(|c| c.bidirectional).copied().collect()
    }
}

fn reason(e: &Error) -> RejectReason {
    match e {
        Error::DegenerateSurface => RejectReason::Degenerate,
        _ => RejectReason::Footprint,
    }
}

/// Matches every point master→slave, then re-matches the rounded result
/// slave→master and keeps pairs landing within `tolerance` of the start.
pub fn bidirectional_match<T: Real>(
    master: &PreparedImage<T>,
    slave: &PreparedImage<T>,
    points: &[Point2],
    cfg: &MatchConfig,
    tolerance: f64,
) -> BidirectionalOutcome {
    let anchors: Vec<(isize, isize)> = points
        .iter()
        .map(|p| (p.x.round() as isize, p.y.round() as isize))
        .collect();
    let forward = match_points(master, slave, &anchors, cfg);
    let mut out = BidirectionalOutcome::default();
    let mut back_anchor = Vec::new();
    let mut pending: Vec<MatchResult> = Vec::new();
    for (p, r) in points.iter().zip(forward) {
        match r {
            Ok(m) => {
                let q = m.slave.round();
                back_anchor.push((q.x as isize, q.y as isize));
                pending.push(m);
            }
            Err(e) => out.rejected.push(Rejection {
                master: *p,
                reason: reason(&e),
            }),
        }
    }
    let backward = match_points(slave, master, &back_anchor, cfg);
    for (m, b) in pending.into_iter().zip(backward) {
        let mut cp = ControlPoint::new(m);
        match b {
            Ok(b) => {
                let d = b.slave.distance(m.master);
                if d <= tolerance {
                    cp.bidirectional = true;
                } else {
                    out.rejected.push(Rejection {
                        master: m.master,
                        reason: RejectReason::Inconsistent(d),
                    });
                }
            }
            Err(e) => out.rejected.push(Rejection {
                master: m.master,
                reason: reason(&e),
            }),
        }
        out.forward.push(cp);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegisterConfig {
    pub interest: InterestPointConfig,
    pub matching: MatchConfig,
    pub refine: RefineConfig,
    /// Maximum forward/backward disagreement, pixels.
    pub bidirectional_tolerance: f64,
}

impl Default for RegisterConfig {
    fn default() -> Self {
        Self {
            interest: InterestPointConfig {
                points_per_block: 3,
                ..Default::default()
            },
            matching: MatchConfig::default(),
            refine: RefineConfig::default(),
            bidirectional_tolerance: 1.0,
        }
    }
}

impl RegisterConfig {
    pub fn validate(&self) -> Result<()> {
        self.interest.validate()?;
        self.matching.validate()?;
        if !(self.bidirectional_tolerance >= 0.0) {
            return Err(Error::InvalidParams("bidirectional_tolerance must be >= 0".into()));
        }
        if !(self.refine.rmse_threshold > 0.0) {
            return Err(Error::InvalidParams("rmse_threshold must be > 0".into()));
        }
        Ok(())
    }
}

/// Border margin keeping both the forward and the backward footprints, plus
/// the filter support of the feature computation, inside the images.
pub fn default_border_margin(cfg: &MatchConfig) -> usize {
    let filter = if cfg.metric.uses_descriptor() {
        cfg.features.bank.border_margin()
    } else {
        0
    };
    cfg.template / 2 + 2 * cfg.search_radius + filter + 1
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageCounts {
    pub interest_points: usize,
    pub forward_matched: usize,
    pub bidirectional: usize,
    pub consistent: usize,
    pub refined: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub features: f64,
    pub detect: f64,
    pub matching: f64,
    pub refine: f64,
    pub warp: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterReport {
    pub counts: StageCounts,
    /// RMSE of the final projective fit over the surviving points, pixels.
    pub rmse: f64,
    /// Final projective model, master to slave, row-major.
    pub homography: [f64; 9],
    /// Wall time per stage, seconds.
    pub timing: StageTiming,
}

#[derive(Debug, Clone)]
pub struct Registration<T> {
    /// Every forward match in master row-major order with its stage flags.
    pub control_points: ControlPointSet,
    pub transform: PiecewiseLinearTransform,
    pub warped: Image<T>,
    pub report: RegisterReport,
}

impl<T> Registration<T> {
    pub fn refined(&self) -> impl Iterator<Item = &ControlPoint> {
        self.control_points.iter().filter(|c| c.refined)
    }
}

/// Registers `slave` onto the grid of `master`.
pub fn register<T: Real>(master: &Image<T>, slave: &Image<T>, cfg: &RegisterConfig) -> Result<Registration<T>> {
    cfg.validate()?;
    let t0 = Instant::now();
    let pm = PreparedImage::new(master.clone(), &cfg.matching)?;
    let ps = PreparedImage::new(slave.clone(), &cfg.matching)?;
    let t_features = t0.elapsed().as_secs_f64();

    let t = Instant::now();
    let points = detect_interest_points(master, &cfg.interest, default_border_margin(&cfg.matching));
    let t_detect = t.elapsed().as_secs_f64();
    log::info!("{} interest points", points.len());

    let t = Instant::now();
    let bi = bidirectional_match(&pm, &ps, &points, &cfg.matching, cfg.bidirectional_tolerance);
    let t_match = t.elapsed().as_secs_f64();
    let verified = bi.verified();
    log::info!("{} forward matches, {} bidirectional", bi.forward.len(), verified.len());

    let t = Instant::now();
    let min_points = cfg.refine.min_points.max(4);
    if verified.len() < min_points {
        return Err(Error::TooFewControlPoints(verified.len()));
    }
    let outcome = iterative_refine(&verified, &cfg.refine).map_err(|e| match e {
        Error::InsufficientPoints { got, .. } => Error::TooFewControlPoints(got),
        e => e,
    })?;
    let t_refine = t.elapsed().as_secs_f64();
    log::info!("{} control points after refinement, rmse {:.4}", outcome.kept.len(), outcome.rmse);

    let t = Instant::now();
    let m: Vec<Point2> = outcome.kept.iter().map(|c| c.master()).collect();
    let s: Vec<Point2> = outcome.kept.iter().map(|c| c.slave()).collect();
    let transform = build_piecewise_linear(&m, &s)?;
    let warped = warp_image(slave, &transform, master.dims());
    let t_warp = t.elapsed().as_secs_f64();

    let mut control_points = bi.forward;
    for c in control_points.iter_mut() {
        let survivor = outcome.kept.iter().chain(&outcome.removed).find(|k| k.master() == c.master());
        if let Some(k) = survivor {
            c.consistent = true;
            c.refined = k.refined;
        }
    }
    control_points.sort_by(master_order);

    let counts = StageCounts {
        interest_points: points.len(),
        forward_matched: control_points.len(),
        bidirectional: verified.len(),
        consistent: control_points.iter().filter(|c| c.consistent).count(),
        refined: outcome.kept.len(),
    };
    Ok(Registration {
        control_points,
        transform,
        warped,
        report: RegisterReport {
            counts,
            rmse: outcome.rmse,
            homography: outcome.homography.to_row_major(),
            timing: StageTiming {
                features: t_features,
                detect: t_detect,
                matching: t_match,
                refine: t_refine,
                warp: t_warp,
                total: t0.elapsed().as_secs_f64(),
            },
        },
    })
}
