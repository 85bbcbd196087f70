use crate::raster::{Image, Point2};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterestPointConfig {
    /// Blocks per axis.
    pub grid_blocks: usize,
    pub points_per_block: usize,
    pub harris_kappa: f64,
    /// Std of the Gaussian window of the structure tensor, pixels.
    pub smoothing_sigma: f64,
    /// Responses at or below this value are never selected.
    pub min_response: f64,
    /// Pixels closer than this to the border are excluded; derived from the
    /// matching footprint when absent.
    pub border_margin: Option<usize>,
}

impl Default for InterestPointConfig {
    fn default() -> Self {
        Self {
            grid_blocks: 10,
            points_per_block: 2,
            harris_kappa: 0.04,
            smoothing_sigma: 1.5,
            min_response: 1e-10,
            border_margin: None,
        }
    }
}

impl InterestPointConfig {
    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error::InvalidParams;
        if self.grid_blocks < 1 || self.points_per_block < 1 {
            return Err(InvalidParams("grid_blocks and points_per_block must be >= 1".into()));
        }
        if !(self.harris_kappa > 0.0 && self.harris_kappa < 0.25) {
            return Err(InvalidParams("harris_kappa must lie in (0, 0.25)".into()));
        }
        if !(self.smoothing_sigma > 0.0) {
            return Err(InvalidParams("smoothing_sigma must be > 0".into()));
        }
        Ok(())
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur with clamped borders.
fn blur(data: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, &k)| k * data[y * w + clamp(x as isize + i as isize - r, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, &k)| k * tmp[clamp(y as isize + i as isize - r, h) * w + x])
                .sum();
        }
    }
    out
}

/// Harris response `det(M) - kappa * trace(M)^2` of the Gaussian-windowed
/// structure tensor.
pub fn harris_response<T: Real>(img: &Image<T>, kappa: f64, sigma: f64) -> Image<f64> {
    let (w, h) = img.dims();
    let mut ixx = vec![0.0; w * h];
    let mut iyy = vec![0.0; w * h];
    let mut ixy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (xa, xb) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let (ya, yb) = (y.saturating_sub(1), (y + 1).min(h - 1));
            let span = |a: usize, b: usize| if b > a { (b - a) as f64 } else { 1.0 };
            let gx = (img.get(xb, y).as_f64() - img.get(xa, y).as_f64()) / span(xa, xb);
            let gy = (img.get(x, yb).as_f64() - img.get(x, ya).as_f64()) / span(ya, yb);
            let i = y * w + x;
            ixx[i] = gx * gx;
            iyy[i] = gy * gy;
            ixy[i] = gx * gy;
        }
    }
    let k = gaussian_kernel(sigma);
    let (sxx, syy, sxy) = (blur(&ixx, w, h, &k), blur(&iyy, w, h, &k), blur(&ixy, w, h, &k));
    let data = (0..w * h)
        .map(|i| {
            let det = sxx[i] * syy[i] - sxy[i] * sxy[i];
            let tr = sxx[i] + syy[i];
            det - kappa * tr * tr
        })
        .collect();
    Image::new(w, h, data).unwrap()
}

/// Block-based Harris detector: the region inside the border margin is split
/// into `grid_blocks^2` blocks and the strongest local maxima of each block
/// are kept.
pub fn detect_interest_points<T: Real>(img: &Image<T>, cfg: &InterestPointConfig, border_margin: usize) -> Vec<Point2> {
    let (w, h) = img.dims();
    let m = cfg.border_margin.unwrap_or(border_margin);
    if w <= 2 * m + 2 || h <= 2 * m + 2 {
        return Vec::new();
    }
    let resp = harris_response(img, cfg.harris_kappa, cfg.smoothing_sigma);
    let is_peak = |x: usize, y: usize| {
        let v = resp.get(x, y);
        if !(v > cfg.min_response) {
            return false;
        }
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = ((x as isize + dx) as usize, (y as isize + dy) as usize);
                let n = resp.get(nx, ny);
                // strict against earlier neighbours so plateaus keep one pixel
                let earlier = dy < 0 || (dy == 0 && dx < 0);
                if n > v || (earlier && n == v) {
                    return false;
                }
            }
        }
        true
    };
    let (iw, ih) = (w - 2 * m, h - 2 * m);
    let g = cfg.grid_blocks;
    let mut points = Vec::new();
    for by in 0..g {
        let (y0, y1) = (m + by * ih / g, m + (by + 1) * ih / g);
        for bx in 0..g {
            let (x0, x1) = (m + bx * iw / g, m + (bx + 1) * iw / g);
            let mut cands: Vec<(f64, usize, usize)> = Vec::new();
            for y in y0.max(1)..y1.min(h - 1) {
                for x in x0.max(1)..x1.min(w - 1) {
                    if is_peak(x, y) {
                        cands.push((resp.get(x, y), x, y));
                    }
                }
            }
            cands.sort_by(|a, b| {
                b.0.partial_cmp(&a.0)
                    .unwrap()
                    .then(a.2.cmp(&b.2))
                    .then(a.1.cmp(&b.1))
            });
            points.extend(
                cands
                    .iter()
                    .take(cfg.points_per_block)
                    .map(|&(_, x, y)| Point2::new(x as f64, y as f64)),
            );
        }
    }
    points
}
