use super::projective::{fit_projective, ProjectiveFit};
use crate::error::{Error, Result};
use crate::raster::{Homography, Point2};
use crate::similarity::MatchResult;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// A matched pair with the stages it survived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub matched: MatchResult,
    pub bidirectional: bool,
    pub consistent: bool,
    pub refined: bool,
}

impl ControlPoint {
    pub fn new(matched: MatchResult) -> Self {
        Self {
            matched,
            bidirectional: false,
            consistent: false,
            refined: false,
        }
    }

    pub fn master(&self) -> Point2 {
        self.matched.master
    }

    pub fn slave(&self) -> Point2 {
        self.matched.slave
    }
}

pub type ControlPointSet = Vec<ControlPoint>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Row {
    x_master: f64,
    y_master: f64,
    x_slave: f64,
    y_slave: f64,
    score: f64,
    bidirectional: bool,
    consistent: bool,
    refined: bool,
}

/// Writes control points as CSV with one survival flag column per stage.
pub fn write_control_point_set<W: std::io::Write>(w: W, cps: &[ControlPoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for c in cps {
        let (m, s) = (c.master(), c.slave());
        wtr.serialize(Row {
            x_master: m.x,
            y_master: m.y,
            x_slave: s.x,
            y_slave: s.y,
            score: c.matched.score,
            bidirectional: c.bidirectional,
            consistent: c.consistent,
            refined: c.refined,
        })
        .map_err(|e| Error::Csv(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Row-major order of master points.
pub fn master_order(a: &ControlPoint, b: &ControlPoint) -> Ordering {
    let (p, q) = (a.master(), b.master());
    p.y.total_cmp(&q.y).then(p.x.total_cmp(&q.x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineConfig {
    /// Stop once the RMSE of the projective fit is below this, pixels.
    pub rmse_threshold: f64,
    pub min_points: usize,
    /// Residual above which points are dropped in one pass before the
    /// iterative loop starts; `None` disables the pass.
    pub gross_cull: Option<f64>,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            rmse_threshold: 1.0,
            min_points: 6,
            gross_cull: Some(10.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    /// Surviving points in master row-major order, flagged `consistent` and `refined`.
    pub kept: ControlPointSet,
    /// Points dropped by the gross cull, flagged neither.
    pub culled: ControlPointSet,
    /// Points removed by the iterative loop, in removal order.
    pub removed: ControlPointSet,
    pub homography: Homography,
    pub rmse: f64,
}

fn fit(points: &[ControlPoint]) -> Result<ProjectiveFit> {
    let m: Vec<Point2> = points.iter().map(|c| c.master()).collect();
    let s: Vec<Point2> = points.iter().map(|c| c.slave()).collect();
    fit_projective(&m, &s)
}

/// Repeatedly fits the projective model and drops the point with the largest
/// residual until the RMSE falls below the threshold.
pub fn iterative_refine(cps: &[ControlPoint], cfg: &RefineConfig) -> Result<RefineOutcome> {
    let min_points = cfg.min_points.max(4);
    if cps.len() < min_points {
        return Err(Error::InsufficientPoints {
            needed: min_points,
            got: cps.len(),
        });
    }
    let mut current: Vec<ControlPoint> = cps.to_vec();
    current.sort_by(master_order);

    let mut culled = Vec::new();
    if let Some(limit) = cfg.gross_cull {
        let f = fit(&current)?;
        let survivors = f.residuals.iter().filter(|&&r| r <= limit).count();
        if survivors >= min_points && survivors < current.len() {
            let (keep, drop): (Vec<_>, Vec<_>) = current
                .iter()
                .zip(&f.residuals)
                .partition(|(_, &r)| r <= limit);
            culled = drop.into_iter().map(|(c, _)| *c).collect();
            current = keep.into_iter().map(|(c, _)| *c).collect();
        }
    }
    for c in current.iter_mut() {
        c.consistent = true;
    }

    let mut removed = Vec::new();
    loop {
        let f = fit(&current)?;
        if f.rmse < cfg.rmse_threshold {
            for c in current.iter_mut() {
                c.refined = true;
            }
            return Ok(RefineOutcome {
                kept: current,
                culled,
                removed,
                homography: f.homography,
                rmse: f.rmse,
            });
        }
        if current.len() <= min_points {
            return Err(Error::RefinementFailed {
                threshold: cfg.rmse_threshold,
                min_points,
            });
        }
        // first maximum in row-major order wins ties
        let worst = f
            .residuals
            .iter()
            .enumerate()
            .fold(0, |best, (i, &r)| if r > f.residuals[best] { i } else { best });
        removed.push(current.remove(worst));
    }
}
