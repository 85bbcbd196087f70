//! Dense HOG-style descriptors over phase congruency (HOPC) or gradient (HOG)
//! features.
//!
//! A block is `m x m` cells of `n x n` pixels. Every pixel of a block votes
//! its Gaussian-weighted amplitude into the two nearest cells per axis and the
//! two nearest orientation bins (trilinear interpolation); the block vector is
//! then L2-normalized. [`dense_block_field`] computes the block descriptor
//! centered on every pixel at once, and [`template_descriptor`] assembles a
//! template-window descriptor by sampling that field on a grid.

mod dense;
mod feature;

pub use dense::{dense_block_field, BlockDescriptorField};
pub use feature::{compute_feature_field, gradient_field, FeatureField, FeatureMode, FeatureParams};

use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Guard added to the squared norm before normalization.
pub const NORM_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescriptorGeometry {
    pub cells_per_block: usize,
    /// Cell side, pixels.
    pub cell_size: usize,
    pub bins: usize,
    /// Overlap between neighbouring blocks as a fraction of the block width.
    pub overlap: f64,
}

impl Default for DescriptorGeometry {
    fn default() -> Self {
        Self {
            cells_per_block: 3,
            cell_size: 4,
            bins: 8,
            overlap: 0.5,
        }
    }
}

impl DescriptorGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.cells_per_block < 1 || self.cell_size < 1 {
            return Err(Error::InvalidParams("cells_per_block and cell_size must be >= 1".into()));
        }
        if self.bins < 2 {
            return Err(Error::InvalidParams("bins must be >= 2".into()));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::InvalidParams("overlap must lie in [0, 1)".into()));
        }
        if self.stride() < 1 {
            return Err(Error::InvalidParams("block stride rounds to zero".into()));
        }
        Ok(())
    }

    pub fn block_width(&self) -> usize {
        self.cells_per_block * self.cell_size
    }

    pub fn stride(&self) -> usize {
        ((1.0 - self.overlap) * self.block_width() as f64).round() as usize
    }

    pub fn block_len(&self) -> usize {
        self.cells_per_block * self.cells_per_block * self.bins
    }

    /// Blocks per axis in a window and the offset of the first block from the
    /// window's top-left corner. Leftover pixels are split evenly.
    pub fn template_grid(&self, window_size: usize) -> Result<(usize, usize)> {
        let bw = self.block_width();
        if window_size < bw {
            return Err(Error::InvalidParams(format!(
                "window {window_size} smaller than block width {bw}"
            )));
        }
        let stride = self.stride();
        let count = (window_size - bw) / stride + 1;
        let span = (count - 1) * stride + bw;
        Ok((count, (window_size - span) / 2))
    }

    pub fn template_len(&self, window_size: usize) -> Result<usize> {
        let (count, _) = self.template_grid(window_size)?;
        Ok(count * count * self.block_len())
    }

    /// Block centers along one axis of a window centered at `center`.
    pub fn template_centers(&self, center: isize, window_size: usize) -> Result<Vec<isize>> {
        let (count, margin) = self.template_grid(window_size)?;
        let origin = center - (window_size / 2) as isize + margin as isize + (self.block_width() / 2) as isize;
        Ok((0..count)
            .map(|k| origin + (k * self.stride()) as isize)
            .collect())
    }
}

/// Per-axis spatial weights of a block: `table[cell][u]` is the Gaussian
/// window times the linear cell weight of local coordinate `u`.
#[derive(Debug, Clone)]
pub(crate) struct AxisWeights<T> {
    pub table: Vec<Vec<T>>,
}

/// Linear split of a local block coordinate between two cells, clamped at
/// the block edges so the weights always sum to one.
pub(crate) fn cell_split(u: usize, geom: &DescriptorGeometry) -> (usize, f64, usize, f64) {
    let m = geom.cells_per_block;
    let c = (u as f64 + 0.5) / geom.cell_size as f64 - 0.5;
    if c <= 0.0 {
        return (0, 1.0, 0, 0.0);
    }
    if c >= (m - 1) as f64 {
        return (m - 1, 1.0, m - 1, 0.0);
    }
    let i0 = c.floor() as usize;
    let f = c - i0 as f64;
    (i0, 1.0 - f, i0 + 1, f)
}

/// Offset of local coordinate `u` from the block center, pixels.
pub(crate) fn center_offset(u: usize, bw: usize) -> f64 {
    u as f64 + 0.5 - bw as f64 / 2.0
}

pub(crate) fn gaussian_sigma(geom: &DescriptorGeometry) -> f64 {
    0.5 * geom.block_width() as f64
}

impl<T: Real> AxisWeights<T> {
    pub fn new(geom: &DescriptorGeometry) -> Self {
        let bw = geom.block_width();
        let sigma = gaussian_sigma(geom);
        let mut table = vec![vec![T::zero(); bw]; geom.cells_per_block];
        for u in 0..bw {
            let d = center_offset(u, bw);
            let g = (-(d * d) / (2.0 * sigma * sigma)).exp();
            let (i0, w0, i1, w1) = cell_split(u, geom);
            table[i0][u] += T::lit(g * w0);
            if w1 > 0.0 {
                table[i1][u] += T::lit(g * w1);
            }
        }
        Self { table }
    }
}

/// Linear split of a folded orientation (degrees) between the two nearest
/// bin centers, wrapping from the last bin to the first.
pub(crate) fn bin_split<T: Real>(deg: T, bins: usize) -> (usize, T, usize, T) {
    let width = T::lit(180.0 / bins as f64);
    let pos = deg / width - T::lit(0.5);
    let floor = pos.floor();
    let f = pos - floor;
    let b0 = floor.to_isize().unwrap_or(0).rem_euclid(bins as isize) as usize;
    let b1 = (b0 + 1) % bins;
    (b0, T::one() - f, b1, f)
}

pub(crate) fn normalize_in_place<T: Real>(v: &mut [T]) {
    let sq: T = v.iter().map(|&x| x * x).sum();
    let eps = T::lit(NORM_EPSILON);
    let scale = T::one() / (sq + eps * eps).sqrt();
    for x in v.iter_mut() {
        *x *= scale;
    }
}

fn block_origin(center: isize, bw: usize) -> isize {
    center - (bw / 2) as isize
}

/// Descriptor of the block centered on pixel `(cx, cy)`, computed directly
/// from the feature field.
pub fn block_descriptor<T: Real>(
    field: &FeatureField<T>,
    cx: isize,
    cy: isize,
    geom: &DescriptorGeometry,
) -> Result<Vec<T>> {
    let mut out = vec![T::zero(); geom.block_len()];
    block_descriptor_into(field, cx, cy, geom, &mut out)?;
    Ok(out)
}

pub(crate) fn block_descriptor_into<T: Real>(
    field: &FeatureField<T>,
    cx: isize,
    cy: isize,
    geom: &DescriptorGeometry,
    out: &mut [T],
) -> Result<()> {
    geom.validate()?;
    let bw = geom.block_width();
    let (w, h) = field.dims();
    let (x0, y0) = (block_origin(cx, bw), block_origin(cy, bw));
    if x0 < 0 || y0 < 0 || x0 as usize + bw > w || y0 as usize + bw > h {
        return Err(Error::OutOfBounds {
            x: cx as f64,
            y: cy as f64,
        });
    }
    let (x0, y0) = (x0 as usize, y0 as usize);
    let m = geom.cells_per_block;
    let bins = geom.bins;
    let sigma = gaussian_sigma(geom);
    let two_sigma_sq = 2.0 * sigma * sigma;
    out.iter_mut().for_each(|v| *v = T::zero());
    for v in 0..bw {
        let dy = center_offset(v, bw);
        let (j0, wy0, j1, wy1) = cell_split(v, geom);
        for u in 0..bw {
            let dx = center_offset(u, bw);
            let amp = field.amplitude.get(x0 + u, y0 + v);
            if amp == T::zero() {
                continue;
            }
            let g = T::lit((-(dx * dx + dy * dy) / two_sigma_sq).exp());
            let mass = amp * g;
            let (i0, wx0, i1, wx1) = cell_split(u, geom);
            let (b0, wb0, b1, wb1) = bin_split(field.orientation.get(x0 + u, y0 + v), bins);
            for (j, wy) in [(j0, wy0), (j1, wy1)] {
                if wy == 0.0 {
                    continue;
                }
                for (i, wx) in [(i0, wx0), (i1, wx1)] {
                    if wx == 0.0 {
                        continue;
                    }
                    let spatial = mass * T::lit(wx * wy);
                    let cell = (j * m + i) * bins;
                    out[cell + b0] += spatial * wb0;
                    out[cell + b1] += spatial * wb1;
                }
            }
        }
    }
    normalize_in_place(out);
    Ok(())
}

/// Concatenated block descriptors of one template window.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateDescriptor<T> {
    pub values: Vec<T>,
    pub blocks_per_axis: usize,
    pub geometry: DescriptorGeometry,
    pub center: (isize, isize),
    pub window_size: usize,
}

impl<T> TemplateDescriptor<T> {
    pub fn same_layout(&self, other: &Self) -> bool {
        self.geometry == other.geometry
            && self.blocks_per_axis == other.blocks_per_axis
            && self.values.len() == other.values.len()
    }
}

/// Assembles the descriptor of the window centered at `center` from a
/// precomputed block field.
pub fn template_descriptor<T: Real>(
    blocks: &BlockDescriptorField<T>,
    center: (isize, isize),
    window_size: usize,
    geom: &DescriptorGeometry,
) -> Result<TemplateDescriptor<T>> {
    if blocks.geometry() != geom {
        return Err(Error::GeometryMismatch);
    }
    let xs = geom.template_centers(center.0, window_size)?;
    let ys = geom.template_centers(center.1, window_size)?;
    let mut values = Vec::with_capacity(xs.len() * ys.len() * geom.block_len());
    for &y in &ys {
        for &x in &xs {
            let d = blocks.descriptor_at(x, y).ok_or(Error::OutOfBounds {
                x: center.0 as f64,
                y: center.1 as f64,
            })?;
            values.extend_from_slice(d);
        }
    }
    Ok(TemplateDescriptor {
        values,
        blocks_per_axis: xs.len(),
        geometry: *geom,
        center,
        window_size,
    })
}

/// Builds a template descriptor by histogramming every block from scratch.
pub fn template_descriptor_direct<T: Real>(
    field: &FeatureField<T>,
    center: (isize, isize),
    window_size: usize,
    geom: &DescriptorGeometry,
) -> Result<TemplateDescriptor<T>> {
    let xs = geom.template_centers(center.0, window_size)?;
    let ys = geom.template_centers(center.1, window_size)?;
    let len = geom.block_len();
    let mut values = vec![T::zero(); xs.len() * ys.len() * len];
    let mut k = 0;
    for &y in &ys {
        for &x in &xs {
            block_descriptor_into(field, x, y, geom, &mut values[k..k + len])?;
            k += len;
        }
    }
    Ok(TemplateDescriptor {
        values,
        blocks_per_axis: xs.len(),
        geometry: *geom,
        center,
        window_size,
    })
}
