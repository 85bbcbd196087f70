//! Correct-match ratios, template-size sweeps, similarity-curve export and
//! naive-versus-fast timing.

use crate::error::{Error, Result};
use crate::raster::{Image, Point2};
use crate::scalar::Real;
use crate::similarity::{
    naive_similarity_surface, resolve_match, similarity_surface, MatchConfig, MatchResult, MetricKind,
    PreparedImage, SimilaritySurface,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;

pub const DEFAULT_TEMPLATE_SIZES: [usize; 5] = [20, 36, 52, 68, 100];
pub const DEFAULT_CMR_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CmrCount {
    /// Matches evaluated.
    pub matched: usize,
    /// Matches closer than the threshold to the ground truth.
    pub correct: usize,
}

impl CmrCount {
    pub fn ratio(&self) -> Option<f64> {
        (self.matched > 0).then(|| self.correct as f64 / self.matched as f64)
    }
}

pub fn count_correct(matches: &[MatchResult], truth: impl Fn(Point2) -> Point2, threshold: f64) -> CmrCount {
    let correct = matches
        .iter()
        .filter(|m| m.slave.distance(truth(m.master)) < threshold)
        .count();
    CmrCount {
        matched: matches.len(),
        correct,
    }
}

/// Fraction of matches whose slave point lies strictly within `threshold`
/// pixels of the ground-truth position.
pub fn cmr(matches: &[MatchResult], truth: impl Fn(Point2) -> Point2, threshold: f64) -> Result<f64> {
    count_correct(matches, truth, threshold).ratio().ok_or(Error::NoMatches)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub metric: MetricKind,
    pub template: usize,
    #[serde(rename = "C")]
    pub matched: usize,
    #[serde(rename = "CM")]
    pub correct: usize,
    /// Empty when nothing was matched.
    pub cmr: Option<f64>,
    /// Matching wall time, seconds; per-image preparation is excluded.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn get(&self, metric: MetricKind, template: usize) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.metric == metric && r.template == template)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wtr.serialize(r).map_err(|e| Error::Csv(e.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Border margin that keeps every footprint of a sweep inside the images.
pub fn sweep_border_margin(sizes: &[usize], cfg: &MatchConfig) -> usize {
    let t = sizes.iter().copied().max().unwrap_or(cfg.template);
    t / 2 + cfg.search_radius + cfg.features.bank.border_margin() + 1
}

/// Matches the same point set for every metric and template size and scores
/// the results against `truth`. Points whose footprint leaves an image are
/// not counted.
#[allow(clippy::too_many_arguments)]
pub fn sweep_template_sizes<T: Real>(
    master: &Image<T>,
    slave: &Image<T>,
    truth: impl Fn(Point2) -> Point2,
    points: &[Point2],
    metrics: &[MetricKind],
    sizes: &[usize],
    base: &MatchConfig,
    threshold: f64,
) -> Result<EvalReport> {
    let anchors: Vec<(isize, isize)> = points
        .iter()
        .map(|p| (p.x.round() as isize, p.y.round() as isize))
        .collect();
    let mut rows = Vec::new();
    for &metric in metrics {
        let cfg = MatchConfig { metric, ..*base };
        let pm = PreparedImage::new(master.clone(), &cfg)?;
        let ps = PreparedImage::new(slave.clone(), &cfg)?;
        for &template in sizes {
            let cfg = MatchConfig { template, ..cfg };
            let t = Instant::now();
            let matches: Vec<MatchResult> = crate::similarity::match_points(&pm, &ps, &anchors, &cfg)
                .into_iter()
                .filter_map(|r| r.ok())
                .collect();
            let seconds = t.elapsed().as_secs_f64();
            let count = count_correct(&matches, &truth, threshold);
            log::info!("{metric} template {template}: {}/{}", count.correct, count.matched);
            rows.push(EvalRow {
                metric,
                template,
                matched: count.matched,
                correct: count.correct,
                cmr: count.ratio(),
                seconds,
            });
        }
    }
    Ok(EvalReport { threshold, rows })
}

/// Full similarity surface at one master point.
pub fn similarity_curve<T: Real>(
    master: &Image<T>,
    slave: &Image<T>,
    point: (isize, isize),
    cfg: &MatchConfig,
) -> Result<SimilaritySurface> {
    let pm = PreparedImage::new(master.clone(), cfg)?;
    let ps = PreparedImage::new(slave.clone(), cfg)?;
    similarity_surface(&pm, &ps, point, cfg)
}

/// Surface as a `(2r+1)^2` raster, row `dy + r`, column `dx + r`.
pub fn surface_image(s: &SimilaritySurface) -> Image<f32> {
    let side = s.side();
    Image::new(side, side, s.scores.iter().map(|&v| v as f32).collect()).expect("square surface")
}

pub fn write_surface_csv<W: Write>(w: W, s: &SimilaritySurface) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        dx: isize,
        dy: isize,
        score: f64,
    }
    let r = s.radius as isize;
    let mut wtr = csv::Writer::from_writer(w);
    for dy in -r..=r {
        for dx in -r..=r {
            wtr.serialize(Row {
                dx,
                dy,
                score: s.get(dx, dy),
            })
            .map_err(|e| Error::Csv(e.to_string()))?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub template: usize,
    pub radius: usize,
    pub points: usize,
    pub naive_seconds: f64,
    /// Includes building both dense block fields.
    pub fast_seconds: f64,
    pub ratio: f64,
    /// Largest score difference between the schemes over all surfaces.
    pub max_score_diff: f64,
    /// Every point resolved to the same integer peak (or failed) under both
    /// schemes.
    pub same_argmax: bool,
    /// Largest distance between the subpixel slave points of the schemes.
    pub max_subpixel_diff: f64,
}

fn surfaces<T: Real>(
    master: &PreparedImage<T>,
    slave: &PreparedImage<T>,
    points: &[(isize, isize)],
    cfg: &MatchConfig,
    naive: bool,
) -> Vec<Option<(SimilaritySurface, MatchResult)>> {
    points
        .par_iter()
        .map(|&p| {
            let s = if naive {
                naive_similarity_surface(master, slave, p, cfg)
            } else {
                similarity_surface(master, slave, p, cfg)
            }
            .ok()?;
            let m = resolve_match(p, &s).ok()?;
            Some((s, m))
        })
        .collect()
}

/// Times the naive and the fast descriptor matching schemes on the same
/// points. Feature fields are computed once up front and are not timed; the
/// fast timing includes the dense block fields. One point is matched by both
/// schemes before timing starts as a warm-up.
pub fn benchmark_naive_vs_fast<T: Real>(
    master: &Image<T>,
    slave: &Image<T>,
    points: &[Point2],
    templates: &[usize],
    radii: &[usize],
    base: &MatchConfig,
) -> Result<Vec<BenchRow>> {
    if !base.metric.uses_descriptor() {
        return Err(Error::InvalidParams("benchmark needs a descriptor metric".into()));
    }
    let pm = PreparedImage::features_only(master.clone(), base)?;
    let ps = PreparedImage::features_only(slave.clone(), base)?;
    let anchors: Vec<(isize, isize)> = points
        .iter()
        .map(|p| (p.x.round() as isize, p.y.round() as isize))
        .collect();
    let mut rows = Vec::new();
    for &radius in radii {
        for &template in templates {
            let cfg = MatchConfig {
                template,
                search_radius: radius,
                ..*base
            };
            cfg.validate()?;
            if let Some(&p) = anchors.first() {
                let _ = naive_similarity_surface(&pm, &ps, p, &cfg);
            }

            let t = Instant::now();
            let naive = surfaces(&pm, &ps, &anchors, &cfg, true);
            let naive_seconds = t.elapsed().as_secs_f64();

            let t = Instant::now();
            let fm = pm.clone().with_blocks(&cfg.geometry)?;
            let fs = ps.clone().with_blocks(&cfg.geometry)?;
            let fast = surfaces(&fm, &fs, &anchors, &cfg, false);
            let fast_seconds = t.elapsed().as_secs_f64();

            let mut max_score_diff = 0.0f64;
            let mut same_argmax = true;
            let mut max_subpixel_diff = 0.0f64;
            for (a, b) in naive.iter().zip(&fast) {
                match (a, b) {
                    (Some((sa, ma)), Some((sb, mb))) => {
                        for (x, y) in sa.scores.iter().zip(&sb.scores) {
                            max_score_diff = max_score_diff.max((x - y).abs());
                        }
                        same_argmax &= ma.offset == mb.offset;
                        max_subpixel_diff = max_subpixel_diff.max(ma.slave.distance(mb.slave));
                    }
                    (None, None) => {}
                    _ => same_argmax = false,
                }
            }
            log::info!("template {template} radius {radius}: naive {naive_seconds:.3}s fast {fast_seconds:.3}s");
            rows.push(BenchRow {
                template,
                radius,
                points: anchors.len(),
                naive_seconds,
                fast_seconds,
                ratio: naive_seconds / fast_seconds.max(f64::MIN_POSITIVE),
                max_score_diff,
                same_argmax,
                max_subpixel_diff,
            });
        }
    }
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(w: W, rows: &[BenchRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(|e| Error::Csv(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}
