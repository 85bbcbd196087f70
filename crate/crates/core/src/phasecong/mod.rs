//! Phase congruency from a log-Gabor filter bank, plus the orientation of
//! phase congruency obtained by projecting odd responses onto the image axes.

mod bank;

pub use bank::{build_log_gabor_bank, radial_gain, FilterBankParams, LogGaborBank};

use crate::error::{Error, Result};
use crate::fft::Fft2d;
use crate::raster::Image;
use crate::scalar::Real;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Phase congruency model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PCParams {
    /// Multiplier `k` of the noise threshold.
    pub noise_gain: f64,
    pub epsilon: f64,
    /// Frequency-spread value below which responses are down-weighted.
    pub spread_cutoff: f64,
    /// Sharpness of the frequency-spread sigmoid.
    pub spread_gain: f64,
}

impl Default for PCParams {
    fn default() -> Self {
        Self {
            noise_gain: 2.0,
            epsilon: 1e-4,
            spread_cutoff: 0.4,
            spread_gain: 10.0,
        }
    }
}

impl PCParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_gain >= 0.0) {
            return Err(Error::InvalidParams("noise_gain must be >= 0".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParams("epsilon must be > 0".into()));
        }
        if !(self.spread_gain > 0.0) {
            return Err(Error::InvalidParams("spread_gain must be > 0".into()));
        }
        if !(self.spread_cutoff > 0.0 && self.spread_cutoff < 1.0) {
            return Err(Error::InvalidParams("spread_cutoff must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Complex spatial responses of every filter: even part is the real
/// component, odd part the imaginary one.
#[derive(Debug, Clone)]
pub struct ResponseStack<T> {
    width: usize,
    height: usize,
    params: FilterBankParams,
    angles: Vec<f64>,
    /// Indexed `[orient][scale]`.
    responses: Vec<Vec<Vec<Complex<T>>>>,
}

impl<T: Real> ResponseStack<T> {
    /// Assembles a stack from raw responses indexed `[orient][scale]`, with
    /// explicit filter orientation angles in radians.
    pub fn from_parts(
        width: usize,
        height: usize,
        params: FilterBankParams,
        angles: Vec<f64>,
        responses: Vec<Vec<Vec<Complex<T>>>>,
    ) -> Result<Self> {
        if responses.is_empty() || responses[0].is_empty() {
            return Err(Error::EmptyStack);
        }
        let n_scales = responses[0].len();
        if angles.len() != responses.len()
            || responses
                .iter()
                .any(|o| o.len() != n_scales || o.iter().any(|r| r.len() != width * height))
        {
            return Err(Error::DimensionMismatch("inconsistent response stack".into()));
        }
        Ok(Self {
            width,
            height,
            params: FilterBankParams {
                n_scales,
                n_orients: responses.len(),
                ..params
            },
            angles,
            responses,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn params(&self) -> &FilterBankParams {
        &self.params
    }

    pub fn n_scales(&self) -> usize {
        self.params.n_scales
    }

    pub fn n_orients(&self) -> usize {
        self.params.n_orients
    }

    pub fn angle(&self, orient: usize) -> f64 {
        self.angles[orient]
    }

    pub fn response(&self, scale: usize, orient: usize) -> &[Complex<T>] {
        &self.responses[orient][scale]
    }

    pub fn even(&self, scale: usize, orient: usize) -> Image<T> {
        self.component(scale, orient, |c| c.re)
    }

    pub fn odd(&self, scale: usize, orient: usize) -> Image<T> {
        self.component(scale, orient, |c| c.im)
    }

    pub fn amplitude(&self, scale: usize, orient: usize) -> Image<T> {
        self.component(scale, orient, |c| c.norm())
    }

    fn component(&self, scale: usize, orient: usize, f: impl Fn(&Complex<T>) -> T) -> Image<T> {
        let data = self.responses[orient][scale].iter().map(f).collect();
        Image::new(self.width, self.height, data).expect("stack dimensions are valid")
    }
}

/// Shared FFT state for filtering one image size.
struct Filtering<'a, T: Real> {
    bank: &'a LogGaborBank<T>,
    fft: Fft2d<T>,
    spectrum: Vec<Complex<T>>,
}

impl<'a, T: Real> Filtering<'a, T> {
    fn new(img: &Image<T>, bank: &'a LogGaborBank<T>) -> Result<Self> {
        if img.dims() != bank.dims() {
            return Err(Error::DimensionMismatch(format!(
                "image {:?} vs filter bank {:?}",
                img.dims(),
                bank.dims()
            )));
        }
        let (w, h) = img.dims();
        let fft = Fft2d::new(w, h);
        let mut spectrum: Vec<Complex<T>> =
            img.data().iter().map(|&v| Complex::new(v, T::zero())).collect();
        fft.forward(&mut spectrum);
        Ok(Self {
            bank,
            fft,
            spectrum,
        })
    }

    fn orientation(&self, orient: usize) -> Vec<Vec<Complex<T>>> {
        let angular = self.bank.angular(orient);
        (0..self.bank.params().n_scales)
            .map(|s| {
                let radial = self.bank.radial(s);
                let mut buf: Vec<Complex<T>> = self
                    .spectrum
                    .iter()
                    .zip(radial.iter().zip(angular))
                    .map(|(&c, (&r, &a))| c * (r * a))
                    .collect();
                self.fft.inverse(&mut buf);
                buf
            })
            .collect()
    }
}

/// Filters `img` with every log-Gabor filter of `bank`.
pub fn filter_responses<T: Real>(img: &Image<T>, bank: &LogGaborBank<T>) -> Result<ResponseStack<T>> {
    let filtering = Filtering::new(img, bank)?;
    let p = bank.params();
    let responses = (0..p.n_orients)
        .into_par_iter()
        .map(|o| filtering.orientation(o))
        .collect();
    let angles = (0..p.n_orients).map(|o| p.orientation_angle(o)).collect();
    let (w, h) = img.dims();
    ResponseStack::from_parts(w, h, *p, angles, responses)
}

fn median<T: Real>(mut values: Vec<T>) -> T {
    let n = values.len();
    let cmp = |a: &T, b: &T| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal);
    let (lower, &mut mid, _) = values.select_nth_unstable_by(n / 2, cmp);
    if n % 2 == 1 {
        mid
    } else {
        let lo = lower.iter().copied().fold(T::neg_infinity(), T::max);
        (lo + mid) / T::lit(2.0)
    }
}

fn noise_threshold_from<T: Real>(
    smallest_scale: &[Complex<T>],
    bank: &FilterBankParams,
    params: &PCParams,
) -> T {
    if params.noise_gain == 0.0 || smallest_scale.is_empty() {
        return T::zero();
    }
    let med = median(smallest_scale.iter().map(|c| c.norm()).collect()).as_f64();
    // Rayleigh mode of the smallest-scale amplitude, scaled to total energy
    let tau = med / 4f64.ln().sqrt() * bank.scale_gain_sum();
    let mean = tau * (std::f64::consts::PI / 2.0).sqrt();
    let sigma = tau * ((4.0 - std::f64::consts::PI) / 2.0).sqrt();
    T::lit(params.noise_gain * (mean + sigma))
}

/// Noise threshold `T` of orientation `orient`.
pub fn estimate_noise_threshold<T: Real>(
    stack: &ResponseStack<T>,
    orient: usize,
    params: &PCParams,
) -> Result<T> {
    if orient >= stack.n_orients() {
        return Err(Error::EmptyStack);
    }
    Ok(noise_threshold_from(
        stack.response(0, orient),
        stack.params(),
        params,
    ))
}

/// Phase congruency amplitude with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct PCMap<T> {
    pub amplitude: Image<T>,
    pub bank: FilterBankParams,
    pub params: PCParams,
}

/// Orientation of phase congruency in degrees, `[0, 360)`.
#[derive(Debug, Clone)]
pub struct OrientationMap<T> {
    pub phi: Image<T>,
    /// `sqrt(a^2 + b^2)` of the projected odd responses; zero marks pixels
    /// whose orientation is undefined and reported as 0.
    pub magnitude: Image<T>,
}

impl<T: Real> OrientationMap<T> {
    pub fn is_confident(&self, x: usize, y: usize) -> bool {
        self.magnitude.get(x, y) > T::zero()
    }

    /// Orientation folded into `[0, 180)`.
    pub fn folded(&self) -> Image<T> {
        self.phi.map(fold_degrees)
    }
}

/// Folds an angle in degrees into `[0, 180)`.
pub fn fold_degrees<T: Real>(deg: T) -> T {
    let half = T::lit(180.0);
    let mut f = deg % half;
    if f < T::zero() {
        f += half;
    }
    if f >= half {
        f = T::zero();
    }
    f
}

fn to_full_circle<T: Real>(b: T, a: T) -> T {
    let full = T::lit(360.0);
    let mut d = b.atan2(a).to_degrees();
    if d < T::zero() {
        d += full;
    }
    if d >= full {
        d = T::zero();
    }
    d
}

/// Per-orientation contribution to the phase congruency quotient and to the
/// orientation projection.
struct OrientationTerms<T> {
    numerator: Vec<T>,
    amplitude_sum: Vec<T>,
    odd_sum: Vec<T>,
}

fn orientation_terms<T: Real>(
    responses: &[Vec<Complex<T>>],
    threshold: T,
    params: &PCParams,
) -> OrientationTerms<T> {
    let n = responses[0].len();
    let n_scales = T::lit(responses.len() as f64);
    let eps = T::lit(params.epsilon);
    let cutoff = T::lit(params.spread_cutoff);
    let gain = T::lit(params.spread_gain);
    let mut numerator = vec![T::zero(); n];
    let mut amplitude_sum = vec![T::zero(); n];
    let mut odd_sum = vec![T::zero(); n];
    for i in 0..n {
        let mut sum_e = T::zero();
        let mut sum_o = T::zero();
        let mut sum_a = T::zero();
        let mut max_a = T::zero();
        for r in responses {
            let c = r[i];
            sum_e += c.re;
            sum_o += c.im;
            let a = c.norm();
            sum_a += a;
            max_a = max_a.max(a);
        }
        let energy_norm = (sum_e * sum_e + sum_o * sum_o).sqrt() + eps;
        let mean_e = sum_e / energy_norm;
        let mean_o = sum_o / energy_norm;
        let mut energy = T::zero();
        for r in responses {
            let c = r[i];
            energy += c.re * mean_e + c.im * mean_o - (c.re * mean_o - c.im * mean_e).abs();
        }
        let floored = (energy - threshold).max(T::zero());
        let spread = sum_a / (n_scales * (max_a + eps));
        let weight = T::one() / (T::one() + (gain * (cutoff - spread)).exp());
        numerator[i] = weight * floored;
        amplitude_sum[i] = sum_a;
        odd_sum[i] = sum_o;
    }
    OrientationTerms {
        numerator,
        amplitude_sum,
        odd_sum,
    }
}

/// Merges per-orientation terms in orientation order.
fn assemble<T: Real>(
    width: usize,
    height: usize,
    terms: Vec<(f64, OrientationTerms<T>)>,
    bank: &FilterBankParams,
    params: &PCParams,
) -> (PCMap<T>, OrientationMap<T>) {
    let n = width * height;
    let mut num = vec![T::zero(); n];
    let mut den = vec![T::zero(); n];
    let mut a = vec![T::zero(); n];
    let mut b = vec![T::zero(); n];
    for (angle, t) in &terms {
        let (s, c) = angle.sin_cos();
        let (s, c) = (T::lit(s), T::lit(c));
        for i in 0..n {
            num[i] += t.numerator[i];
            den[i] += t.amplitude_sum[i];
            a[i] += t.odd_sum[i] * c;
            b[i] += t.odd_sum[i] * s;
        }
    }
    let eps = T::lit(params.epsilon);
    let pc = num
        .iter()
        .zip(&den)
        .map(|(&nu, &de)| {
            let v = nu / (de + eps);
            if v.is_finite() {
                v.max(T::zero()).min(T::one())
            } else {
                T::zero()
            }
        })
        .collect();
    let phi = a.iter().zip(&b).map(|(&a, &b)| to_full_circle(b, a)).collect();
    let mag = a.iter().zip(&b).map(|(&a, &b)| a.hypot(b)).collect();
    (
        PCMap {
            amplitude: Image::new(width, height, pc).unwrap(),
            bank: *bank,
            params: *params,
        },
        OrientationMap {
            phi: Image::new(width, height, phi).unwrap(),
            magnitude: Image::new(width, height, mag).unwrap(),
        },
    )
}

fn stack_terms<T: Real>(stack: &ResponseStack<T>, params: &PCParams) -> Vec<(f64, OrientationTerms<T>)> {
    (0..stack.n_orients())
        .into_par_iter()
        .map(|o| {
            let responses = &stack.responses[o];
            let t = noise_threshold_from(&responses[0], stack.params(), params);
            (stack.angle(o), orientation_terms(responses, t, params))
        })
        .collect()
}

/// Phase congruency amplitude, clamped to `[0, 1]`.
pub fn phase_congruency<T: Real>(stack: &ResponseStack<T>, params: &PCParams) -> Result<PCMap<T>> {
    params.validate()?;
    let (w, h) = stack.dims();
    Ok(assemble(w, h, stack_terms(stack, params), stack.params(), params).0)
}

/// Orientation of phase congruency from the odd responses summed over scales.
pub fn pc_orientation<T: Real>(stack: &ResponseStack<T>) -> OrientationMap<T> {
    let (w, h) = stack.dims();
    let n = w * h;
    let mut a = vec![T::zero(); n];
    let mut b = vec![T::zero(); n];
    for o in 0..stack.n_orients() {
        let (s, c) = stack.angle(o).sin_cos();
        let (s, c) = (T::lit(s), T::lit(c));
        let mut odd = vec![T::zero(); n];
        for r in &stack.responses[o] {
            for (acc, v) in odd.iter_mut().zip(r) {
                *acc += v.im;
            }
        }
        for i in 0..n {
            a[i] += odd[i] * c;
            b[i] += odd[i] * s;
        }
    }
    OrientationMap {
        phi: Image::new(w, h, a.iter().zip(&b).map(|(&a, &b)| to_full_circle(b, a)).collect()).unwrap(),
        magnitude: Image::new(w, h, a.iter().zip(&b).map(|(&a, &b)| a.hypot(b)).collect()).unwrap(),
    }
}

/// Computes phase congruency and its orientation without materializing the
/// whole response stack: each orientation is filtered, reduced and dropped.
pub fn phase_features<T: Real>(
    img: &Image<T>,
    bank: &LogGaborBank<T>,
    params: &PCParams,
) -> Result<(PCMap<T>, OrientationMap<T>)> {
    params.validate()?;
    let filtering = Filtering::new(img, bank)?;
    let bp = bank.params();
    let terms = (0..bp.n_orients)
        .into_par_iter()
        .map(|o| {
            let responses = filtering.orientation(o);
            let t = noise_threshold_from(&responses[0], bp, params);
            (bp.orientation_angle(o), orientation_terms(&responses, t, params))
        })
        .collect();
    let (w, h) = img.dims();
    Ok(assemble(w, h, terms, bp, params))
}
