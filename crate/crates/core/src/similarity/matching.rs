use super::metrics::{ncc, MiScratch};
use super::surface::{MetricKind, SimilaritySurface};
use crate::descriptor::{
    block_descriptor_into, compute_feature_field, dense_block_field,
    BlockDescriptorField, DescriptorGeometry, FeatureField, FeatureMode, FeatureParams,
};
use crate::error::{Error, Result};
use crate::raster::{Image, Point2};
use crate::scalar::Real;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    pub metric: MetricKind,
    /// Template window side, pixels.
    pub template: usize,
    /// Half-width of the search square, pixels.
    pub search_radius: usize,
    pub mi_bins: usize,
    pub geometry: DescriptorGeometry,
    pub features: FeatureParams,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            metric: MetricKind::HopcNcc,
            template: 68,
            search_radius: 10,
            mi_bins: 32,
            geometry: DescriptorGeometry::default(),
            features: FeatureParams::default(),
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.template < 2 {
            return Err(Error::InvalidParams("template must be >= 2".into()));
        }
        if self.mi_bins < 2 {
            return Err(Error::InvalidParams("mi_bins must be >= 2".into()));
        }
        self.geometry.validate()?;
        if self.metric.uses_descriptor() {
            self.geometry.template_grid(self.template)?;
            self.features.bank.validate()?;
            self.features.pc.validate()?;
        }
        Ok(())
    }

    pub fn feature_mode(&self) -> Option<FeatureMode> {
        match self.metric {
            MetricKind::HopcNcc => Some(FeatureMode::PhaseCongruency),
            MetricKind::HogNcc => Some(FeatureMode::Gradient),
            _ => None,
        }
    }
}

/// An image with whatever per-image data a metric needs: the feature field
/// for descriptor metrics, and optionally the dense block field used by the
/// fast scheme.
#[derive(Debug, Clone)]
pub struct PreparedImage<T> {
    pub image: Image<T>,
    pub features: Option<FeatureField<T>>,
    pub blocks: Option<BlockDescriptorField<T>>,
}

impl<T: Real> PreparedImage<T> {
    /// Prepares for the fast scheme (feature field and block field).
    pub fn new(image: Image<T>, cfg: &MatchConfig) -> Result<Self> {
        let mut p = Self::features_only(image, cfg)?;
        if let Some(f) = &p.features {
            p.blocks = Some(dense_block_field(f, &cfg.geometry)?);
        }
        Ok(p)
    }

    /// Prepares for the naive scheme: feature field only.
    pub fn features_only(image: Image<T>, cfg: &MatchConfig) -> Result<Self> {
        cfg.validate()?;
        let features = match cfg.feature_mode() {
            Some(mode) => Some(compute_feature_field(&image, mode, &cfg.features)?),
            None => None,
        };
        Ok(Self {
            image,
            features,
            blocks: None,
        })
    }

    pub fn from_features(image: Image<T>, features: FeatureField<T>) -> Self {
        Self {
            image,
            features: Some(features),
            blocks: None,
        }
    }

    pub fn with_blocks(mut self, geom: &DescriptorGeometry) -> Result<Self> {
        let f = self
            .features
            .as_ref()
            .ok_or_else(|| Error::InvalidParams("no feature field to build blocks from".into()))?;
        self.blocks = Some(dense_block_field(f, geom)?);
        Ok(self)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.image.dims()
    }
}

/// Matched point pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub master: Point2,
    pub slave: Point2,
    pub score: f64,
    /// Integer offset of the peak within the search square.
    pub offset: (isize, isize),
    pub at_boundary: bool,
    pub refined: bool,
}

fn window_fits(center: isize, size: usize, extent: usize) -> bool {
    let lo = center - (size / 2) as isize;
    lo >= 0 && lo + size as isize <= extent as isize
}

fn check_footprints(master: (usize, usize), slave: (usize, usize), p: (isize, isize), cfg: &MatchConfig) -> Result<()> {
    let r = cfg.search_radius as isize;
    let t = cfg.template;
    let oob = Error::OutOfBounds {
        x: p.0 as f64,
        y: p.1 as f64,
    };
    if !(window_fits(p.0, t, master.0) && window_fits(p.1, t, master.1)) {
        return Err(oob);
    }
    for d in [-r, r] {
        if !(window_fits(p.0 + d, t, slave.0) && window_fits(p.1 + d, t, slave.1)) {
            return Err(oob);
        }
    }
    Ok(())
}

enum Scheme {
    Fast,
    Naive,
}

fn require_features<T>(img: &PreparedImage<T>) -> Result<&FeatureField<T>> {
    img.features
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("descriptor metric needs a prepared feature field".into()))
}

fn gather_blocks<T: Real>(
    blocks: &BlockDescriptorField<T>,
    cx: isize,
    cy: isize,
    cfg: &MatchConfig,
    out: &mut Vec<T>,
) -> Result<()> {
    let xs = cfg.geometry.template_centers(cx, cfg.template)?;
    let ys = cfg.geometry.template_centers(cy, cfg.template)?;
    out.clear();
    for &y in &ys {
        for &x in &xs {
            let d = blocks.descriptor_at(x, y).ok_or(Error::OutOfBounds {
                x: cx as f64,
                y: cy as f64,
            })?;
            out.extend_from_slice(d);
        }
    }
    Ok(())
}

fn direct_descriptor<T: Real>(
    field: &FeatureField<T>,
    cx: isize,
    cy: isize,
    cfg: &MatchConfig,
    out: &mut Vec<T>,
) -> Result<()> {
    let xs = cfg.geometry.template_centers(cx, cfg.template)?;
    let ys = cfg.geometry.template_centers(cy, cfg.template)?;
    let len = cfg.geometry.block_len();
    out.clear();
    out.resize(xs.len() * ys.len() * len, T::zero());
    let mut k = 0;
    for &y in &ys {
        for &x in &xs {
            block_descriptor_into(field, x, y, &cfg.geometry, &mut out[k..k + len])?;
            k += len;
        }
    }
    Ok(())
}

fn surface_impl<T: Real>(
    master: &PreparedImage<T>,
    slave: &PreparedImage<T>,
    p: (isize, isize),
    cfg: &MatchConfig,
    scheme: Scheme,
) -> Result<SimilaritySurface> {
    cfg.validate()?;
    check_footprints(master.dims(), slave.dims(), p, cfg)?;
    let r = cfg.search_radius as isize;
    let t = cfg.template;
    let half = (t / 2) as isize;
    let mut scores = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
    match cfg.metric {
        MetricKind::Ncc | MetricKind::Mi => {
            let mut a = Vec::with_capacity(t * t);
            let mut b = Vec::with_capacity(t * t);
            master
                .image
                .window_into((p.0 - half) as usize, (p.1 - half) as usize, t, t, &mut a);
            let mut scratch = MiScratch::new(cfg.mi_bins);
            let qa: Vec<u16> = a.iter().map(|&v| scratch.quantize(v)).collect();
            let mut qb = Vec::with_capacity(t * t);
            for dy in -r..=r {
                for dx in -r..=r {
                    slave.image.window_into(
                        (p.0 + dx - half) as usize,
                        (p.1 + dy - half) as usize,
                        t,
                        t,
                        &mut b,
                    );
                    let s = if cfg.metric == MetricKind::Ncc {
                        ncc(&a, &b)?.score
                    } else {
                        qb.clear();
                        qb.extend(b.iter().map(|&v| scratch.quantize(v)));
                        scratch.mi_binned(&qa, &qb)
                    };
                    scores.push(s);
                }
            }
        }
        MetricKind::HogNcc | MetricKind::HopcNcc => {
            let mut a = Vec::new();
            let mut b = Vec::new();
            match scheme {
                Scheme::Fast => {
                    let mb = master.blocks.as_ref().ok_or_else(|| {
                        Error::InvalidParams("fast matching needs the master block field".into())
                    })?;
                    let sb = slave.blocks.as_ref().ok_or_else(|| {
                        Error::InvalidParams("fast matching needs the slave block field".into())
                    })?;
                    if mb.geometry() != &cfg.geometry || sb.geometry() != &cfg.geometry {
                        return Err(Error::GeometryMismatch);
                    }
                    gather_blocks(mb, p.0, p.1, cfg, &mut a)?;
                    for dy in -r..=r {
                        for dx in -r..=r {
                            gather_blocks(sb, p.0 + dx, p.1 + dy, cfg, &mut b)?;
                            scores.push(ncc(&a, &b)?.score);
                        }
                    }
                }
                Scheme::Naive => {
                    let mf = require_features(master)?;
                    let sf = require_features(slave)?;
                    direct_descriptor(mf, p.0, p.1, cfg, &mut a)?;
                    for dy in -r..=r {
                        for dx in -r..=r {
                            direct_descriptor(sf, p.0 + dx, p.1 + dy, cfg, &mut b)?;
                            scores.push(ncc(&a, &b)?.score);
                        }
                    }
                }
            }
        }
    }
    SimilaritySurface::new(cfg.search_radius, cfg.metric, scores)
}

/// Similarity surface using the precomputed block fields for descriptor
/// metrics.
pub fn similarity_surface<T: Real>(
    master: &PreparedImage<T>,
    slave: &PreparedImage<T>,
    p: (isize, isize),
    cfg: &MatchConfig,
) -> Result<SimilaritySurface> {
    surface_impl(master, slave, p, cfg, Scheme::Fast)
}

/// Similarity surface recomputing every template descriptor from the
/// feature field.
pub fn naive_similarity_surface<T: Real>(
    master: &PreparedImage<T>,
    slave: &PreparedImage<T>,
    p: (isize, isize),
    cfg: &MatchConfig,
) -> Result<SimilaritySurface> {
    surface_impl(master, slave, p, cfg, Scheme::Naive)
}

/// Turns a surface into a match: integer argmax, then quadratic subpixel
/// refinement unless the peak lies on the search boundary.
pub fn resolve_match(p: (isize, isize), surface: &SimilaritySurface) -> Result<MatchResult> {
    let peak = surface.argmax()?;
    let score = surface.get(peak.dx, peak.dy);
    let correction = surface.subpixel_peak(peak);
    let (cx, cy) = correction.unwrap_or((0.0, 0.0));
    Ok(MatchResult {
        master: Point2::new(p.0 as f64, p.1 as f64),
        slave: Point2::new(
            (p.0 + peak.dx) as f64 + cx,
            (p.1 + peak.dy) as f64 + cy,
        ),
        score,
        offset: (peak.dx, peak.dy),
        at_boundary: peak.at_boundary,
        refined: correction.is_some(),
    })
}

/// Matches the template centered at `p` in `master` against the search
/// square around `p` in `slave`.
pub fn match_template<T: Real>(
    master: &PreparedImage<T>,
    slave: &PreparedImage<T>,
    p: (isize, isize),
    cfg: &MatchConfig,
) -> Result<MatchResult> {
    resolve_match(p, &similarity_surface(master, slave, p, cfg)?)
}

/// Same contract as [`match_template`], recomputing descriptors per offset.
pub fn naive_match_template<T: Real>(
    master: &PreparedImage<T>,
    slave: &PreparedImage<T>,
    p: (isize, isize),
    cfg: &MatchConfig,
) -> Result<MatchResult> {
    resolve_match(p, &naive_similarity_surface(master, slave, p, cfg)?)
}

/// Matches many points in parallel; results keep input order.
pub fn match_points<T: Real>(
    master: &PreparedImage<T>,
    slave: &PreparedImage<T>,
    points: &[(isize, isize)],
    cfg: &MatchConfig,
) -> Vec<Result<MatchResult>> {
    points
        .par_iter()
        .map(|&p| match_template(master, slave, p, cfg))
        .collect()
}

pub fn naive_match_points<T: Real>(
    master: &PreparedImage<T>,
    slave: &PreparedImage<T>,
    points: &[(isize, isize)],
    cfg: &MatchConfig,
) -> Vec<Result<MatchResult>> {
    points
        .par_iter()
        .map(|&p| naive_match_template(master, slave, p, cfg))
        .collect()
}
