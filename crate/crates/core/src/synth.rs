//! Synthetic master/slave pairs with non-linear radiometric differences and
//! an identity geometric ground truth.

use crate::error::{Error, Result};
use crate::fft::{bin_frequency, Fft2d};
use crate::raster::{Image, Point2};
use crate::scalar::Real;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticParams {
    /// Number of Gaussians in the intensity field.
    pub k: usize,
    /// Gaussian width, pixels.
    pub gaussian_width: f64,
    pub base_offset: f64,
    pub noise_variance: f64,
    /// Intensity map `(in, out)` breakpoints; drawn from the seed when absent.
    pub breakpoints: Option<Vec<(f64, f64)>>,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            k: 3,
            gaussian_width: 80.0,
            base_offset: 0.1,
            noise_variance: 0.2,
            breakpoints: None,
            seed: 0,
        }
    }
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParams("k must be >= 1".into()));
        }
        if !(self.gaussian_width > 0.0) {
            return Err(Error::InvalidParams("gaussian_width must be > 0".into()));
        }
        if !(self.noise_variance >= 0.0) {
            return Err(Error::InvalidParams("noise_variance must be >= 0".into()));
        }
        if let Some(bp) = &self.breakpoints {
            validate_breakpoints(bp)?;
        }
        Ok(())
    }

    /// Breakpoints in use: the configured ones or the seeded default.
    pub fn effective_breakpoints(&self) -> Vec<(f64, f64)> {
        self.breakpoints
            .clone()
            .unwrap_or_else(|| default_breakpoints(self.seed))
    }
}

// independent streams drawn from one seed
const STREAM_CENTERS: u64 = 1;
const STREAM_BREAKPOINTS: u64 = 2;
const STREAM_NOISE: u64 = 3;
const STREAM_TEXTURE: u64 = 4;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Gaussian centers drawn uniformly over a `width x height` image.
pub fn gaussian_centers(width: usize, height: usize, k: usize, seed: u64) -> Vec<Point2> {
    let mut r = rng(seed, STREAM_CENTERS);
    (0..k)
        .map(|_| {
            Point2::new(
                r.random::<f64>() * (width - 1) as f64,
                r.random::<f64>() * (height - 1) as f64,
            )
        })
        .collect()
}

/// Multiplier `offset + (1/K) sum_k exp(-|p - mu_k|^2 / (2 width^2))`.
pub fn intensity_multiplier(p: Point2, centers: &[Point2], width: f64, offset: f64) -> f64 {
    let two_w2 = 2.0 * width * width;
    let sum: f64 = centers
        .iter()
        .map(|c| {
            let d = p - *c;
            (-(d.x * d.x + d.y * d.y) / two_w2).exp()
        })
        .sum();
    offset + sum / centers.len() as f64
}

/// Spatially varying intensity field: every pixel is scaled by a mixture of
/// `K` seeded Gaussians plus a constant offset, then clamped to `[0, 1]`.
pub fn gaussian_intensity_field<T: Real>(img: &Image<T>, params: &SyntheticParams) -> Result<Image<T>> {
    params.validate()?;
    let (w, h) = img.dims();
    let centers = gaussian_centers(w, h, params.k, params.seed);
    Ok(apply_intensity_field(img, &centers, params))
}

pub fn apply_intensity_field<T: Real>(img: &Image<T>, centers: &[Point2], params: &SyntheticParams) -> Image<T> {
    let (w, h) = img.dims();
    Image::from_fn(w, h, |x, y| {
        let m = intensity_multiplier(
            Point2::new(x as f64, y as f64),
            centers,
            params.gaussian_width,
            params.base_offset,
        );
        (img.get(x, y) * T::lit(m)).max(T::zero()).min(T::one())
    })
}

fn validate_breakpoints(bp: &[(f64, f64)]) -> Result<()> {
    if bp.len() < 2 {
        return Err(Error::InvalidParams("need at least two breakpoints".into()));
    }
    if bp.windows(2).any(|p| !(p[1].0 > p[0].0 && p[1].1 > p[0].1)) {
        return Err(Error::InvalidParams(
            "breakpoints must be strictly increasing in both coordinates".into(),
        ));
    }
    Ok(())
}

/// Four-segment monotone map with inputs at quarters and seeded outputs.
pub fn default_breakpoints(seed: u64) -> Vec<(f64, f64)> {
    let mut r = rng(seed, STREAM_BREAKPOINTS);
    let mut inner: Vec<f64> = (0..3).map(|_| 0.05 + 0.9 * r.random::<f64>()).collect();
    inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // keep outputs strictly increasing
    for i in 1..inner.len() {
        if inner[i] <= inner[i - 1] {
            inner[i] = inner[i - 1] + 1e-3;
        }
    }
    let mut bp = vec![(0.0, 0.0)];
    for (i, v) in inner.into_iter().enumerate() {
        bp.push((0.25 * (i + 1) as f64, v));
    }
    bp.push((1.0, 1.0));
    bp
}

fn piecewise_value(v: f64, bp: &[(f64, f64)]) -> f64 {
    let first = bp[0];
    let last = bp[bp.len() - 1];
    if v <= first.0 {
        return first.1;
    }
    if v >= last.0 {
        return last.1;
    }
    let i = bp.partition_point(|p| p.0 <= v) - 1;
    let (a, b) = (bp[i], bp[i + 1]);
    a.1 + (v - a.0) * (b.1 - a.1) / (b.0 - a.0)
}

/// Maps every pixel through the monotone piecewise-linear curve `bp`.
pub fn piecewise_linear_intensity_map<T: Real>(img: &Image<T>, bp: &[(f64, f64)]) -> Result<Image<T>> {
    validate_breakpoints(bp)?;
    Ok(img.map(|v| T::lit(piecewise_value(v.as_f64(), bp))))
}

/// Seeded i.i.d. Gaussian noise, clamped to `[0, 1]` after addition.
pub fn add_gaussian_noise<T: Real>(img: &Image<T>, variance: f64, seed: u64) -> Result<Image<T>> {
    if !(variance >= 0.0) {
        return Err(Error::InvalidParams("variance must be >= 0".into()));
    }
    if variance == 0.0 {
        return Ok(img.clone());
    }
    let noise = noise_samples(img.data().len(), variance, seed);
    let data = img
        .data()
        .iter()
        .zip(noise)
        .map(|(&v, n)| (v + T::lit(n)).max(T::zero()).min(T::one()))
        .collect();
    Image::new(img.width(), img.height(), data)
}

/// The raw noise stream used by [`add_gaussian_noise`].
pub fn noise_samples(n: usize, variance: f64, seed: u64) -> Vec<f64> {
    let normal = Normal::new(0.0, variance.sqrt()).expect("finite variance");
    let mut r = rng(seed, STREAM_NOISE);
    (0..n).map(|_| normal.sample(&mut r)).collect()
}

#[derive(Debug, Clone)]
pub struct SyntheticPair<T> {
    pub master: Image<T>,
    pub slave: Image<T>,
    pub centers: Vec<Point2>,
    pub breakpoints: Vec<(f64, f64)>,
}

impl<T> SyntheticPair<T> {
    /// Geometric ground truth: the pair differs only radiometrically.
    pub fn ground_truth(&self, p: Point2) -> Point2 {
        p
    }
}

/// Master gets the Gaussian intensity field; slave gets the piecewise-linear
/// intensity map plus Gaussian noise.
pub fn make_synthetic_pair<T: Real>(base: &Image<T>, params: &SyntheticParams) -> Result<SyntheticPair<T>> {
    params.validate()?;
    let (w, h) = base.dims();
    let centers = gaussian_centers(w, h, params.k, params.seed);
    let breakpoints = params.effective_breakpoints();
    let master = apply_intensity_field(base, &centers, params);
    let mapped = piecewise_linear_intensity_map(base, &breakpoints)?;
    let slave = add_gaussian_noise(&mapped, params.noise_variance, params.seed)?;
    Ok(SyntheticPair {
        master,
        slave,
        centers,
        breakpoints,
    })
}

/// Seeded procedural texture in `[0, 1]`: a sum of band-limited noise
/// components, each restricted to a narrow band of orientations and
/// wavelengths.
pub fn procedural_texture<T: Real>(width: usize, height: usize, seed: u64) -> Image<T> {
    const COMPONENTS: usize = 6;
    let mut r = rng(seed, STREAM_TEXTURE);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let fft = Fft2d::<f64>::new(width, height);
    let mut acc = vec![0.0f64; width * height];
    for _ in 0..COMPONENTS {
        let theta = r.random::<f64>() * std::f64::consts::PI;
        let wavelength = 6.0 + 30.0 * r.random::<f64>();
        let f0 = 1.0 / wavelength;
        let ang_sigma = 0.25 + 0.5 * r.random::<f64>();
        let mut buf: Vec<Complex<f64>> = (0..width * height)
            .map(|_| Complex::new(normal.sample(&mut r), 0.0))
            .collect();
        fft.forward(&mut buf);
        for y in 0..height {
            let v = bin_frequency(y, height);
            for x in 0..width {
                let u = bin_frequency(x, width);
                let rad = u.hypot(v);
                let gain = if rad == 0.0 {
                    0.0
                } else {
                    // symmetric in angle so the spatial result stays real
                    let d = (v.atan2(u) - theta).rem_euclid(std::f64::consts::PI);
                    let d = d.min(std::f64::consts::PI - d);
                    let radial = (-(rad / f0).ln().powi(2) / (2.0 * 0.5f64.ln().powi(2))).exp();
                    radial * (-(d * d) / (2.0 * ang_sigma * ang_sigma)).exp()
                };
                buf[y * width + x] *= gain;
            }
        }
        fft.inverse(&mut buf);
        let rms = (buf.iter().map(|c| c.re * c.re).sum::<f64>() / buf.len() as f64).sqrt();
        if rms > 0.0 {
            for (a, c) in acc.iter_mut().zip(&buf) {
                *a += c.re / rms;
            }
        }
    }
    let img = Image::new(width, height, acc.into_iter().map(T::lit).collect()).unwrap();
    img.normalize_to_unit()
}
