//! Reference implementations shared by the integration tests.

use hopc::descriptor::{DescriptorGeometry, FeatureField, NORM_EPSILON};

/// Block histogram built straight from the definition: Gaussian window over
/// the block, bilinear vote between neighbouring cell centers (clamped at the
/// block edge), linear vote between the two nearest orientation bins with
/// wrap-around, then L2 normalization with the epsilon guard.
pub fn oracle_block(field: &FeatureField<f64>, cx: isize, cy: isize, g: &DescriptorGeometry) -> Vec<f64> {
    let bw = g.cells_per_block * g.cell_size;
    let m = g.cells_per_block;
    let bins = g.bins;
    let sigma = bw as f64 / 2.0;
    let x0 = cx - (bw / 2) as isize;
    let y0 = cy - (bw / 2) as isize;
    let mut h = vec![0.0; m * m * bins];
    let axis = |t: usize| -> Vec<(usize, f64)> {
        let c = (t as f64 + 0.5) / g.cell_size as f64 - 0.5;
        let c = c.clamp(0.0, (m - 1) as f64);
        let lo = c.floor() as usize;
        let f = c - lo as f64;
        if f == 0.0 {
            vec![(lo, 1.0)]
        } else {
            vec![(lo, 1.0 - f), (lo + 1, f)]
        }
    };
    for v in 0..bw {
        for u in 0..bw {
            let px = (x0 + u as isize) as usize;
            let py = (y0 + v as isize) as usize;
            let amp = field.amplitude.get(px, py);
            let dx = u as f64 + 0.5 - bw as f64 / 2.0;
            let dy = v as f64 + 0.5 - bw as f64 / 2.0;
            let wgt = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
            let width = 180.0 / bins as f64;
            let pos = field.orientation.get(px, py) / width - 0.5;
            let b0 = pos.floor();
            let fb = pos - b0;
            let b0 = (b0 as isize).rem_euclid(bins as isize) as usize;
            let b1 = (b0 + 1) % bins;
            for (j, wy) in axis(v) {
                for (i, wx) in axis(u) {
                    let base = (j * m + i) * bins;
                    h[base + b0] += amp * wgt * wx * wy * (1.0 - fb);
                    h[base + b1] += amp * wgt * wx * wy * fb;
                }
            }
        }
    }
    let norm = (h.iter().map(|x| x * x).sum::<f64>() + NORM_EPSILON * NORM_EPSILON).sqrt();
    h.iter().map(|x| x / norm).collect()
}

/// Whole-window descriptor: blocks tiled from the window corner at the block
/// stride, leftover pixels split evenly on both sides.
pub fn oracle_template(field: &FeatureField<f64>, c: (isize, isize), size: usize, g: &DescriptorGeometry) -> Vec<f64> {
    let bw = g.cells_per_block * g.cell_size;
    let stride = ((1.0 - g.overlap) * bw as f64).round() as usize;
    let n = (size - bw) / stride + 1;
    let pad = (size - ((n - 1) * stride + bw)) / 2;
    let left = |c: isize| c - (size / 2) as isize + pad as isize;
    let mut out = Vec::new();
    for by in 0..n {
        for bx in 0..n {
            let cx = left(c.0) + (bx * stride + bw / 2) as isize;
            let cy = left(c.1) + (by * stride + bw / 2) as isize;
            out.extend(oracle_block(field, cx, cy, g));
        }
    }
    out
}
