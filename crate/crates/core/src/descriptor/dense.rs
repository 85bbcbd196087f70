use super::{normalize_in_place, AxisWeights, DescriptorGeometry, FeatureField};
use crate::descriptor::bin_split;
use crate::error::{Error, Result};
use crate::scalar::Real;
use rayon::prelude::*;

/// Block descriptor centered on every pixel whose block fits in the image
/// (the "block image" used by fast template matching).
#[derive(Debug, Clone)]
pub struct BlockDescriptorField<T> {
    width: usize,
    height: usize,
    geometry: DescriptorGeometry,
    /// Valid centers span `[half, half + valid_w)` per axis.
    half: usize,
    valid_w: usize,
    valid_h: usize,
    data: Vec<T>,
}

impl<T: Real> BlockDescriptorField<T> {
    pub fn geometry(&self) -> &DescriptorGeometry {
        &self.geometry
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn is_valid(&self, cx: isize, cy: isize) -> bool {
        let h = self.half as isize;
        cx >= h && cy >= h && cx < h + self.valid_w as isize && cy < h + self.valid_h as isize
    }

    /// Valid-region mask, row-major over the full image.
    pub fn valid_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.width * self.height];
        for y in 0..self.height {
            for x in 0..self.width {
                mask[y * self.width + x] = self.is_valid(x as isize, y as isize);
            }
        }
        mask
    }

    pub fn descriptor_at(&self, cx: isize, cy: isize) -> Option<&[T]> {
        if !self.is_valid(cx, cy) {
            return None;
        }
        let len = self.geometry.block_len();
        let i = (cy as usize - self.half) * self.valid_w + (cx as usize - self.half);
        Some(&self.data[i * len..(i + 1) * len])
    }
}

/// Computes every block descriptor of `field` with separable passes over
/// per-bin weighted amplitude images.
///
/// The spatial weight of a pixel is a product of per-axis terms (Gaussian
/// window times cell weight), so each `(bin, cell_x, cell_y)` entry is a
/// separable correlation of the bin image with two short kernels.
pub fn dense_block_field<T: Real>(
    field: &FeatureField<T>,
    geom: &DescriptorGeometry,
) -> Result<BlockDescriptorField<T>> {
    geom.validate()?;
    let (w, h) = field.dims();
    let bw = geom.block_width();
    if w < bw || h < bw {
        return Err(Error::InvalidParams(format!(
            "image {w}x{h} smaller than block width {bw}"
        )));
    }
    let m = geom.cells_per_block;
    let bins = geom.bins;
    let len = geom.block_len();
    let (vw, vh) = (w - bw + 1, h - bw + 1);
    let weights = AxisWeights::<T>::new(geom);

    // amplitude split into orientation bins
    let mut bin_images = vec![vec![T::zero(); w * h]; bins];
    for (i, (&a, &o)) in field
        .amplitude
        .data()
        .iter()
        .zip(field.orientation.data())
        .enumerate()
    {
        if a == T::zero() {
            continue;
        }
        let (b0, w0, b1, w1) = bin_split(o, bins);
        bin_images[b0][i] += a * w0;
        bin_images[b1][i] += a * w1;
    }

    // horizontal pass: rows[bin][cell_x] is a vw x h image
    let rows: Vec<Vec<Vec<T>>> = bin_images
        .par_iter()
        .map(|img| {
            (0..m)
                .map(|i| {
                    let k = &weights.table[i];
                    let mut out = vec![T::zero(); vw * h];
                    for y in 0..h {
                        let src = &img[y * w..(y + 1) * w];
                        let dst = &mut out[y * vw..(y + 1) * vw];
                        for (x0, d) in dst.iter_mut().enumerate() {
                            let mut acc = T::zero();
                            for (u, &kv) in k.iter().enumerate() {
                                acc += kv * src[x0 + u];
                            }
                            *d = acc;
                        }
                    }
                    out
                })
                .collect()
        })
        .collect();
    drop(bin_images);

    // vertical pass, one output row of block origins at a time
    let mut data = vec![T::zero(); vw * vh * len];
    data.par_chunks_mut(vw * len)
        .enumerate()
        .for_each(|(y0, out_row)| {
            for (j, kv) in weights.table.iter().enumerate() {
                for (b, per_cell) in rows.iter().enumerate() {
                    for (i, img) in per_cell.iter().enumerate() {
                        let slot = (j * m + i) * bins + b;
                        for x0 in 0..vw {
                            let mut acc = T::zero();
                            for (v, &k) in kv.iter().enumerate() {
                                acc += k * img[(y0 + v) * vw + x0];
                            }
                            out_row[x0 * len + slot] = acc;
                        }
                    }
                }
            }
            for d in out_row.chunks_mut(len) {
                normalize_in_place(d);
            }
        });

    Ok(BlockDescriptorField {
        width: w,
        height: h,
        geometry: *geom,
        half: bw / 2,
        valid_w: vw,
        valid_h: vh,
        data,
    })
}
